#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dcert/dds.hpp"
#include "dcert/diagnostics.hpp"

namespace dcert {

enum class ValueKind { String, Number, Timestamp, GeoPointKind, Identifier };

/// Schema entry for one manifest metadata field.
struct FieldSpec {
    std::string name;
    ValueKind value_kind = ValueKind::String;
    bool required = false;
    std::optional<std::vector<std::string>> allowed_values;
};

/// Where a feature's values come from: either a metadata field read verbatim,
/// or the solar-elevation derivation over a geopoint field and a timestamp field.
struct FieldSource {
    std::string field;
};
struct SolarElevationSource {
    std::string gps_field;
    std::string time_field;
};
using FeatureSource = std::variant<FieldSource, SolarElevationSource>;

enum class FeatureKind { Categorical, BinnedContinuous };

struct FeatureSpec {
    std::string name;
    FeatureSource source;
    FeatureKind kind = FeatureKind::Categorical;
    // Binned-continuous: k+1 strictly increasing edges defining k buckets.
    std::vector<double> bucket_edges;
    // Categorical: category names, aligned with target_distribution.
    std::vector<std::string> categories;
    // One proportion per bucket/category, summing to 1.
    std::vector<double> target_distribution;
};

// ---- Check descriptors (discriminated union on "kind") ----

struct HistogramComplianceCheck {
    std::string feature;
    std::string tolerance_const;
};
struct ClassProportionCheck {
    std::string tolerance_const;
    std::map<std::string, double> target;  // label -> proportion
    std::optional<std::string> justification;
};
struct DatasetSizeCheck {
    double epsilon = 0;
    double delta = 0;
    double sigma_hat = 0;
    double range = 0;
};
struct SplitIntegrityCheck {};
struct MetadataConformityCheck {};
struct SessionHomogeneityCheck {
    std::string by;  // "label" or a feature name
    double alpha = 0.05;
    std::string session_field = "group";
};
struct ManualCheck {
    std::string instructions;
    std::string required_role;  // one of the attestation roles
};

using CheckDescriptor =
    std::variant<HistogramComplianceCheck, ClassProportionCheck, DatasetSizeCheck,
                 SplitIntegrityCheck, MetadataConformityCheck, SessionHomogeneityCheck,
                 ManualCheck>;

const char* check_kind_name(const CheckDescriptor& check);

enum class RequirementMode { Automatic, Manual };

struct TraceLinks {
    std::vector<std::string> dds_refs;
    std::vector<std::string> system_refs;
};

struct Requirement {
    std::string id;
    std::string title;
    RequirementMode mode = RequirementMode::Automatic;
    CheckDescriptor check;
    TraceLinks trace;
    bool derived = false;
};

/// Parsed Dataset Requirement Specification.
struct DrsDocument {
    std::string version;
    std::map<std::string, double> constants;
    std::vector<FieldSpec> metadata_schema;
    std::vector<FeatureSpec> features;
    std::vector<Requirement> requirements;

    const FieldSpec* find_field(const std::string& name) const;
    const FeatureSpec* find_feature(const std::string& name) const;
    std::optional<double> find_constant(const std::string& name) const;
};

/// Parses a DRS document from JSON text. Throws ParseError (with line/column
/// for syntax errors, element path for structural ones). Duplicate requirement
/// ids, unknown keys, unknown check kinds and wrong value kinds are all fatal.
DrsDocument parse_drs(const std::string& text);

/// Cross-reference and invariant validation against a DDS catalog.
/// Returns diagnostics sorted by element path; empty iff the document is valid.
std::vector<SpecDiagnostic> validate_drs(const DrsDocument& doc, const DdsCatalog& catalog);

/// Canonical serialization; parse_drs(render_drs(d)) is structurally equal to d
/// and two renders of the same document are byte-identical.
std::string render_drs(const DrsDocument& doc);

}  // namespace dcert
