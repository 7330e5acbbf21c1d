#pragma once

#include <chrono>
#include <string>
#include <variant>
#include <vector>

#include "dcert/drs.hpp"
#include "dcert/manifest.hpp"

namespace dcert {

/// Intermediate solar quantities for one (location, instant) evaluation.
struct SolarState {
    double julian_day = 0;        // days
    double declination = 0;       // degrees
    double equation_of_time = 0;  // minutes
    double hour_angle = 0;        // degrees
    double elevation = 0;         // degrees, geometric (no refraction)
};

/// Continuous Julian Day number. Supported range: years 1900-2100;
/// throws std::out_of_range outside it.
double julian_day(std::chrono::sys_seconds instant);

/// Geometric solar elevation in degrees via the NOAA low-accuracy series
/// (fractional year, declination and equation-of-time expansions, true solar
/// time from clock time + EoT + 4*lon). Agrees with ephemeris oracles to
/// better than 0.5 degrees over the supported range.
SolarState solar_state(GeoPoint location, std::chrono::sys_seconds instant);

double solar_elevation(GeoPoint location, std::chrono::sys_seconds instant);

/// A derived feature value: numeric for binned-continuous features, the raw
/// string for categorical ones.
using FeatureValue = std::variant<double, std::string>;

struct DerivedFeature {
    std::vector<std::pair<std::string, FeatureValue>> values;       // record id -> value
    std::vector<std::pair<std::string, std::string>> unresolvable;  // record id -> reason
};

/// Evaluates a feature over every record. Records lacking the source fields
/// (or holding the wrong value kind) land in `unresolvable` with a reason.
/// Throws std::invalid_argument when the feature references a metadata field
/// absent from the DRS schema (a spec error, not a data error).
DerivedFeature derive_feature(const DatasetManifest& manifest, const FeatureSpec& feature,
                              const DrsDocument& doc);

}  // namespace dcert
