#include "dcert/astro.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dcert {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

void check_supported_range(std::chrono::sys_seconds instant) {
    using namespace std::chrono;
    const year_month_day ymd{floor<days>(instant)};
    const int y = static_cast<int>(ymd.year());
    if (y < 1900 || y > 2100) {
        throw std::out_of_range("timestamp year " + std::to_string(y) +
                                " outside supported range 1900-2100");
    }
}

}  // namespace

double julian_day(std::chrono::sys_seconds instant) {
    check_supported_range(instant);
    const double unix_seconds = static_cast<double>(instant.time_since_epoch().count());
    return unix_seconds / 86400.0 + 2440587.5;
}

SolarState solar_state(GeoPoint location, std::chrono::sys_seconds instant) {
    using namespace std::chrono;
    check_supported_range(instant);

    const sys_days day = floor<days>(instant);
    const year_month_day ymd{day};
    const sys_days year_start = sys_days{ymd.year() / January / 1};
    const int day_of_year = static_cast<int>((day - year_start).count()) + 1;
    const double minutes_utc =
        static_cast<double>((instant - day).count()) / 60.0;  // minutes since midnight UTC
    const double hour = minutes_utc / 60.0;

    // NOAA fractional year (radians). The 365-day year of the low-accuracy
    // series is part of the published fit.
    const double gamma = 2.0 * std::numbers::pi / 365.0 * (day_of_year - 1 + (hour - 12.0) / 24.0);

    const double eqtime =
        229.18 * (0.000075 + 0.001868 * std::cos(gamma) - 0.032077 * std::sin(gamma) -
                  0.014615 * std::cos(2 * gamma) - 0.040849 * std::sin(2 * gamma));

    const double decl =
        0.006918 - 0.399912 * std::cos(gamma) + 0.070257 * std::sin(gamma) -
        0.006758 * std::cos(2 * gamma) + 0.000907 * std::sin(2 * gamma) -
        0.002697 * std::cos(3 * gamma) + 0.00148 * std::sin(3 * gamma);  // radians

    // True solar time in minutes; longitude east-positive contributes 4 min/deg.
    const double true_solar = minutes_utc + eqtime + 4.0 * location.lon;
    double hour_angle = true_solar / 4.0 - 180.0;
    while (hour_angle < -180.0) hour_angle += 360.0;
    while (hour_angle > 180.0) hour_angle -= 360.0;

    const double lat = location.lat * kDeg;
    double sin_elev = std::sin(lat) * std::sin(decl) +
                      std::cos(lat) * std::cos(decl) * std::cos(hour_angle * kDeg);
    sin_elev = std::clamp(sin_elev, -1.0, 1.0);

    SolarState state;
    state.julian_day = julian_day(instant);
    state.declination = decl / kDeg;
    state.equation_of_time = eqtime;
    state.hour_angle = hour_angle;
    state.elevation = std::asin(sin_elev) / kDeg;
    return state;
}

double solar_elevation(GeoPoint location, std::chrono::sys_seconds instant) {
    return solar_state(location, instant).elevation;
}

DerivedFeature derive_feature(const DatasetManifest& manifest, const FeatureSpec& feature,
                              const DrsDocument& doc) {
    auto require_declared = [&](const std::string& field) {
        if (!doc.find_field(field)) {
            throw std::invalid_argument("feature \"" + feature.name +
                                        "\" references undeclared metadata field \"" + field +
                                        "\"");
        }
    };

    DerivedFeature out;
    if (const auto* field_src = std::get_if<FieldSource>(&feature.source)) {
        require_declared(field_src->field);
        for (const DatasetRecord& record : manifest.records) {
            auto it = record.meta.find(field_src->field);
            if (it == record.meta.end()) {
                out.unresolvable.emplace_back(record.id,
                                              "missing field " + field_src->field);
                continue;
            }
            if (feature.kind == FeatureKind::BinnedContinuous) {
                if (const auto* n = std::get_if<double>(&it->second)) {
                    out.values.emplace_back(record.id, *n);
                } else {
                    out.unresolvable.emplace_back(
                        record.id, "field " + field_src->field + " is not numeric");
                }
            } else {
                if (const auto* s = std::get_if<std::string>(&it->second)) {
                    out.values.emplace_back(record.id, *s);
                } else if (const auto* t = std::get_if<UtcTime>(&it->second)) {
                    out.values.emplace_back(record.id, t->text);
                } else {
                    out.unresolvable.emplace_back(
                        record.id, "field " + field_src->field + " is not a string");
                }
            }
        }
        return out;
    }

    const auto& solar = std::get<SolarElevationSource>(feature.source);
    require_declared(solar.gps_field);
    require_declared(solar.time_field);
    for (const DatasetRecord& record : manifest.records) {
        auto gps_it = record.meta.find(solar.gps_field);
        if (gps_it == record.meta.end()) {
            out.unresolvable.emplace_back(record.id, "missing field " + solar.gps_field);
            continue;
        }
        auto time_it = record.meta.find(solar.time_field);
        if (time_it == record.meta.end()) {
            out.unresolvable.emplace_back(record.id, "missing field " + solar.time_field);
            continue;
        }
        const auto* point = std::get_if<GeoPoint>(&gps_it->second);
        if (!point) {
            out.unresolvable.emplace_back(record.id,
                                          "field " + solar.gps_field + " is not a geopoint");
            continue;
        }
        const auto* time = std::get_if<UtcTime>(&time_it->second);
        if (!time) {
            out.unresolvable.emplace_back(record.id,
                                          "field " + solar.time_field + " is not a timestamp");
            continue;
        }
        try {
            out.values.emplace_back(record.id, solar_elevation(*point, time->instant));
        } catch (const std::out_of_range& e) {
            out.unresolvable.emplace_back(record.id, e.what());
        }
    }
    return out;
}

}  // namespace dcert
