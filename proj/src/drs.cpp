#include "dcert/drs.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace dcert {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr double kSumTolerance = 1e-9;

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

[[noreturn]] void fail(const std::string& message, const std::string& path) {
    throw ParseError(message, path);
}

const json& member(const json& obj, const char* key, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(std::string("missing key \"") + key + "\"", path);
    return *it;
}

std::string get_string(const json& obj, const char* key, const std::string& path) {
    const json& v = member(obj, key, path);
    if (!v.is_string()) fail(std::string("\"") + key + "\" must be a string", path + "/" + key);
    return v.get<std::string>();
}

double get_number(const json& obj, const char* key, const std::string& path) {
    const json& v = member(obj, key, path);
    if (!v.is_number()) fail(std::string("\"") + key + "\" must be a number", path + "/" + key);
    return v.get<double>();
}

bool get_bool(const json& obj, const char* key, const std::string& path) {
    const json& v = member(obj, key, path);
    if (!v.is_boolean()) fail(std::string("\"") + key + "\" must be a boolean", path + "/" + key);
    return v.get<bool>();
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                         const std::string& path) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find_if(known.begin(), known.end(),
                         [&](const char* k) { return key == k; }) == known.end()) {
            fail("unknown key \"" + key + "\"", path);
        }
    }
}

ValueKind parse_value_kind(const std::string& name, const std::string& path) {
    if (name == "string") return ValueKind::String;
    if (name == "number") return ValueKind::Number;
    if (name == "timestamp") return ValueKind::Timestamp;
    if (name == "geopoint") return ValueKind::GeoPointKind;
    if (name == "identifier") return ValueKind::Identifier;
    fail("unknown value kind \"" + name + "\"", path);
}

const char* value_kind_name(ValueKind kind) {
    switch (kind) {
        case ValueKind::String: return "string";
        case ValueKind::Number: return "number";
        case ValueKind::Timestamp: return "timestamp";
        case ValueKind::GeoPointKind: return "geopoint";
        case ValueKind::Identifier: return "identifier";
    }
    return "?";
}

// "solar_elevation(gps_field, time_field)" or a bare metadata field name.
FeatureSource parse_feature_source(const std::string& text, const std::string& path) {
    const std::string prefix = "solar_elevation(";
    if (text.rfind(prefix, 0) == 0) {
        if (text.back() != ')') fail("malformed derivation rule \"" + text + "\"", path);
        std::string args = text.substr(prefix.size(), text.size() - prefix.size() - 1);
        auto comma = args.find(',');
        if (comma == std::string::npos) {
            fail("solar_elevation takes two arguments (gps field, time field)", path);
        }
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(' '));
            s.erase(s.find_last_not_of(' ') + 1);
            return s;
        };
        SolarElevationSource src{trim(args.substr(0, comma)), trim(args.substr(comma + 1))};
        if (src.gps_field.empty() || src.time_field.empty()) {
            fail("solar_elevation arguments must be non-empty", path);
        }
        return src;
    }
    if (text.find('(') != std::string::npos) {
        fail("unknown derivation rule \"" + text + "\"", path);
    }
    if (text.empty()) fail("feature source must be non-empty", path);
    return FieldSource{text};
}

std::string render_feature_source(const FeatureSource& source) {
    if (const auto* f = std::get_if<FieldSource>(&source)) return f->field;
    const auto& s = std::get<SolarElevationSource>(source);
    return "solar_elevation(" + s.gps_field + ", " + s.time_field + ")";
}

FeatureSpec parse_feature(const json& item, const std::string& path) {
    if (!item.is_object()) fail("feature must be an object", path);
    reject_unknown_keys(item, {"name", "source", "kind", "buckets", "target_distribution"},
                        path);
    FeatureSpec spec;
    spec.name = get_string(item, "name", path);
    spec.source = parse_feature_source(get_string(item, "source", path), path + "/source");

    const std::string kind = get_string(item, "kind", path);
    if (kind == "categorical") {
        spec.kind = FeatureKind::Categorical;
        const json& target = member(item, "target_distribution", path);
        if (!target.is_object()) {
            fail("categorical target_distribution must be an object (category -> proportion)",
                 path + "/target_distribution");
        }
        // json objects iterate in key order, so category order is canonical.
        for (const auto& [category, value] : target.items()) {
            if (!value.is_number()) {
                fail("proportion must be a number", path + "/target_distribution/" + category);
            }
            spec.categories.push_back(category);
            spec.target_distribution.push_back(value.get<double>());
        }
        if (item.contains("buckets")) {
            fail("categorical feature cannot declare buckets", path + "/buckets");
        }
    } else if (kind == "binned-continuous") {
        spec.kind = FeatureKind::BinnedContinuous;
        const json& buckets = member(item, "buckets", path);
        if (!buckets.is_array() || buckets.size() < 2) {
            fail("buckets must be an array of at least two edges", path + "/buckets");
        }
        for (std::size_t i = 0; i < buckets.size(); ++i) {
            if (!buckets[i].is_number()) {
                fail("bucket edge must be a number", path + "/buckets/" + std::to_string(i));
            }
            spec.bucket_edges.push_back(buckets[i].get<double>());
        }
        const json& target = member(item, "target_distribution", path);
        if (!target.is_array()) {
            fail("binned target_distribution must be an array",
                 path + "/target_distribution");
        }
        for (std::size_t i = 0; i < target.size(); ++i) {
            if (!target[i].is_number()) {
                fail("proportion must be a number",
                     path + "/target_distribution/" + std::to_string(i));
            }
            spec.target_distribution.push_back(target[i].get<double>());
        }
    } else {
        fail("unknown feature kind \"" + kind + "\"", path + "/kind");
    }
    return spec;
}

CheckDescriptor parse_check(const json& item, const std::string& path) {
    if (!item.is_object()) fail("check must be an object", path);
    const std::string kind = get_string(item, "kind", path);

    if (kind == "histogram_compliance") {
        reject_unknown_keys(item, {"kind", "feature", "tolerance_const"}, path);
        return HistogramComplianceCheck{get_string(item, "feature", path),
                                        get_string(item, "tolerance_const", path)};
    }
    if (kind == "class_proportion") {
        reject_unknown_keys(item, {"kind", "tolerance_const", "target", "justification"}, path);
        ClassProportionCheck check;
        check.tolerance_const = get_string(item, "tolerance_const", path);
        const json& target = member(item, "target", path);
        if (!target.is_object()) {
            fail("target must be an object (label -> proportion)", path + "/target");
        }
        for (const auto& [label, value] : target.items()) {
            if (!value.is_number()) fail("proportion must be a number", path + "/target/" + label);
            check.target[label] = value.get<double>();
        }
        if (item.contains("justification")) {
            check.justification = get_string(item, "justification", path);
        }
        return check;
    }
    if (kind == "dataset_size") {
        reject_unknown_keys(item, {"kind", "epsilon", "delta", "sigma_hat", "range"}, path);
        return DatasetSizeCheck{get_number(item, "epsilon", path), get_number(item, "delta", path),
                                get_number(item, "sigma_hat", path),
                                get_number(item, "range", path)};
    }
    if (kind == "split_integrity") {
        reject_unknown_keys(item, {"kind"}, path);
        return SplitIntegrityCheck{};
    }
    if (kind == "metadata_conformity") {
        reject_unknown_keys(item, {"kind"}, path);
        return MetadataConformityCheck{};
    }
    if (kind == "session_homogeneity") {
        reject_unknown_keys(item, {"kind", "by", "alpha", "session_field"}, path);
        SessionHomogeneityCheck check;
        check.by = get_string(item, "by", path);
        check.alpha = get_number(item, "alpha", path);
        if (item.contains("session_field")) {
            check.session_field = get_string(item, "session_field", path);
        }
        return check;
    }
    if (kind == "manual") {
        reject_unknown_keys(item, {"kind", "instructions", "required_role"}, path);
        ManualCheck check{get_string(item, "instructions", path),
                          get_string(item, "required_role", path)};
        static const std::set<std::string> roles{"application_expert", "acquisition_system_expert",
                                                 "machine_learning_expert"};
        if (!roles.count(check.required_role)) {
            fail("unknown inspector role \"" + check.required_role + "\"",
                 path + "/required_role");
        }
        return check;
    }
    fail("unknown check kind \"" + kind + "\"", path + "/kind");
}

Requirement parse_requirement(const json& item, const std::string& path) {
    if (!item.is_object()) fail("requirement must be an object", path);
    reject_unknown_keys(item, {"id", "title", "mode", "check", "trace", "derived"}, path);
    Requirement req;
    req.id = get_string(item, "id", path);
    if (req.id.empty()) fail("requirement id must be non-empty", path + "/id");
    req.title = get_string(item, "title", path);

    const std::string mode = get_string(item, "mode", path);
    if (mode == "automatic") {
        req.mode = RequirementMode::Automatic;
    } else if (mode == "manual") {
        req.mode = RequirementMode::Manual;
    } else {
        fail("unknown mode \"" + mode + "\"", path + "/mode");
    }

    req.check = parse_check(member(item, "check", path), path + "/check");

    const json& trace = member(item, "trace", path);
    if (!trace.is_object()) fail("trace must be an object", path + "/trace");
    reject_unknown_keys(trace, {"dds", "system"}, path + "/trace");
    auto read_refs = [&](const char* key) {
        std::vector<std::string> refs;
        if (!trace.contains(key)) return refs;
        const json& arr = trace[key];
        if (!arr.is_array()) {
            fail(std::string("trace \"") + key + "\" must be an array",
                 path + "/trace/" + key);
        }
        for (std::size_t i = 0; i < arr.size(); ++i) {
            if (!arr[i].is_string()) {
                fail("trace reference must be a string",
                     path + "/trace/" + key + "/" + std::to_string(i));
            }
            refs.push_back(arr[i].get<std::string>());
        }
        return refs;
    };
    req.trace.dds_refs = read_refs("dds");
    req.trace.system_refs = read_refs("system");
    req.derived = get_bool(item, "derived", path);
    return req;
}

}  // namespace

const char* check_kind_name(const CheckDescriptor& check) {
    struct Visitor {
        const char* operator()(const HistogramComplianceCheck&) { return "histogram_compliance"; }
        const char* operator()(const ClassProportionCheck&) { return "class_proportion"; }
        const char* operator()(const DatasetSizeCheck&) { return "dataset_size"; }
        const char* operator()(const SplitIntegrityCheck&) { return "split_integrity"; }
        const char* operator()(const MetadataConformityCheck&) { return "metadata_conformity"; }
        const char* operator()(const SessionHomogeneityCheck&) { return "session_homogeneity"; }
        const char* operator()(const ManualCheck&) { return "manual"; }
    };
    return std::visit(Visitor{}, check);
}

const FieldSpec* DrsDocument::find_field(const std::string& name) const {
    auto it = std::find_if(metadata_schema.begin(), metadata_schema.end(),
                           [&](const FieldSpec& f) { return f.name == name; });
    return it == metadata_schema.end() ? nullptr : &*it;
}

const FeatureSpec* DrsDocument::find_feature(const std::string& name) const {
    auto it = std::find_if(features.begin(), features.end(),
                           [&](const FeatureSpec& f) { return f.name == name; });
    return it == features.end() ? nullptr : &*it;
}

std::optional<double> DrsDocument::find_constant(const std::string& name) const {
    auto it = constants.find(name);
    if (it == constants.end()) return std::nullopt;
    return it->second;
}

DrsDocument parse_drs(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError("syntax error: " + std::string(e.what()), "", line, col);
    }
    if (!root.is_object()) fail("DRS root must be a JSON object", "");
    reject_unknown_keys(root, {"drs_version", "constants", "metadata_schema", "features",
                               "requirements"},
                        "");

    DrsDocument doc;
    doc.version = get_string(root, "drs_version", "");

    if (root.contains("constants")) {
        const json& constants = root["constants"];
        if (!constants.is_object()) fail("\"constants\" must be an object", "/constants");
        for (const auto& [name, value] : constants.items()) {
            if (!value.is_number()) {
                fail("constant must be a number", "/constants/" + name);
            }
            doc.constants[name] = value.get<double>();
        }
    }

    if (root.contains("metadata_schema")) {
        const json& schema = root["metadata_schema"];
        if (!schema.is_array()) fail("\"metadata_schema\" must be an array", "/metadata_schema");
        for (std::size_t i = 0; i < schema.size(); ++i) {
            const std::string path = "/metadata_schema/" + std::to_string(i);
            const json& item = schema[i];
            if (!item.is_object()) fail("field spec must be an object", path);
            reject_unknown_keys(item, {"name", "kind", "required", "allowed_values"}, path);
            FieldSpec field;
            field.name = get_string(item, "name", path);
            field.value_kind = parse_value_kind(get_string(item, "kind", path), path + "/kind");
            field.required = get_bool(item, "required", path);
            if (item.contains("allowed_values")) {
                const json& allowed = item["allowed_values"];
                if (!allowed.is_array()) {
                    fail("\"allowed_values\" must be an array", path + "/allowed_values");
                }
                std::vector<std::string> values;
                for (std::size_t j = 0; j < allowed.size(); ++j) {
                    if (!allowed[j].is_string()) {
                        fail("allowed value must be a string",
                             path + "/allowed_values/" + std::to_string(j));
                    }
                    values.push_back(allowed[j].get<std::string>());
                }
                field.allowed_values = std::move(values);
            }
            doc.metadata_schema.push_back(std::move(field));
        }
    }

    if (root.contains("features")) {
        const json& features = root["features"];
        if (!features.is_array()) fail("\"features\" must be an array", "/features");
        for (std::size_t i = 0; i < features.size(); ++i) {
            doc.features.push_back(parse_feature(features[i], "/features/" + std::to_string(i)));
        }
    }

    if (root.contains("requirements")) {
        const json& requirements = root["requirements"];
        if (!requirements.is_array()) fail("\"requirements\" must be an array", "/requirements");
        std::map<std::string, std::size_t> first_seen;
        for (std::size_t i = 0; i < requirements.size(); ++i) {
            const std::string path = "/requirements/" + std::to_string(i);
            Requirement req = parse_requirement(requirements[i], path);
            auto [it, inserted] = first_seen.emplace(req.id, i);
            if (!inserted) {
                fail("duplicate requirement id \"" + req.id + "\" (also declared at /requirements/" +
                         std::to_string(it->second) + ")",
                     path + "/id");
            }
            doc.requirements.push_back(std::move(req));
        }
    }
    return doc;
}

std::vector<SpecDiagnostic> validate_drs(const DrsDocument& doc, const DdsCatalog& catalog) {
    std::vector<SpecDiagnostic> out;
    auto error = [&](std::string path, std::string message) {
        out.push_back({Severity::Error, std::move(path), std::move(message)});
    };
    auto warning = [&](std::string path, std::string message) {
        out.push_back({Severity::Warning, std::move(path), std::move(message)});
    };

    std::set<std::string> field_names;
    for (std::size_t i = 0; i < doc.metadata_schema.size(); ++i) {
        const FieldSpec& field = doc.metadata_schema[i];
        const std::string path = "/metadata_schema/" + std::to_string(i);
        if (field.name.empty()) error(path + "/name", "field name must be non-empty");
        if (!field_names.insert(field.name).second) {
            error(path + "/name", "duplicate metadata field \"" + field.name + "\"");
        }
    }

    std::set<std::string> feature_names;
    for (std::size_t i = 0; i < doc.features.size(); ++i) {
        const FeatureSpec& feature = doc.features[i];
        const std::string path = "/features/" + std::to_string(i);
        if (!feature_names.insert(feature.name).second) {
            error(path + "/name", "duplicate feature \"" + feature.name + "\"");
        }
        if (feature.kind == FeatureKind::BinnedContinuous) {
            for (std::size_t j = 0; j + 1 < feature.bucket_edges.size(); ++j) {
                if (feature.bucket_edges[j] >= feature.bucket_edges[j + 1]) {
                    error(path + "/buckets/" + std::to_string(j + 1),
                          "bucket edges must be strictly increasing");
                    break;
                }
            }
            std::size_t n_buckets = feature.bucket_edges.size() - 1;
            if (feature.target_distribution.size() != n_buckets) {
                error(path + "/target_distribution",
                      "expected " + std::to_string(n_buckets) + " proportions, got " +
                          std::to_string(feature.target_distribution.size()));
            }
        }
        double sum = 0;
        bool in_range = true;
        for (double p : feature.target_distribution) {
            sum += p;
            if (p < 0 || p > 1) in_range = false;
        }
        if (!in_range) {
            error(path + "/target_distribution", "proportions must lie in [0, 1]");
        }
        if (std::fabs(sum - 1.0) > kSumTolerance) {
            std::ostringstream msg;
            msg << "distribution sums to " << sum;
            error(path + "/target_distribution", msg.str());
        }
        // Field sources must resolve against the metadata schema.
        if (const auto* f = std::get_if<FieldSource>(&feature.source)) {
            if (!doc.find_field(f->field)) {
                error(path + "/source", "undeclared metadata field \"" + f->field + "\"");
            }
        } else {
            const auto& s = std::get<SolarElevationSource>(feature.source);
            const FieldSpec* gps = doc.find_field(s.gps_field);
            const FieldSpec* time = doc.find_field(s.time_field);
            if (!gps) error(path + "/source", "undeclared metadata field \"" + s.gps_field + "\"");
            if (!time) error(path + "/source", "undeclared metadata field \"" + s.time_field + "\"");
            if (gps && gps->value_kind != ValueKind::GeoPointKind) {
                error(path + "/source", "field \"" + s.gps_field + "\" is not a geopoint");
            }
            if (time && time->value_kind != ValueKind::Timestamp) {
                error(path + "/source", "field \"" + s.time_field + "\" is not a timestamp");
            }
        }
    }

    auto check_tolerance_const = [&](const std::string& name, const std::string& path) {
        auto value = doc.find_constant(name);
        if (!value) {
            error(path, "undefined constant \"" + name + "\"");
        } else if (*value <= 0 || *value > 1) {
            error(path, "tolerance \"" + name + "\" must lie in (0, 1]");
        }
    };

    for (std::size_t i = 0; i < doc.requirements.size(); ++i) {
        const Requirement& req = doc.requirements[i];
        const std::string path = "/requirements/" + std::to_string(i);

        const bool is_manual_check = std::holds_alternative<ManualCheck>(req.check);
        if (req.mode == RequirementMode::Manual && !is_manual_check) {
            error(path + "/check", "manual requirement must carry a manual check");
        }
        if (req.mode == RequirementMode::Automatic && is_manual_check) {
            error(path + "/check", "automatic requirement cannot carry a manual check");
        }

        for (std::size_t j = 0; j < req.trace.dds_refs.size(); ++j) {
            const std::string& ref = req.trace.dds_refs[j];
            const std::string ref_path = path + "/trace/dds/" + std::to_string(j);
            if (!valid_dds_id(ref)) {
                error(ref_path, "malformed DDS id \"" + ref + "\"");
            } else if (!catalog.contains(ref)) {
                error(ref_path, "dangling DDS reference \"" + ref + "\"");
            }
        }
        if (req.derived && !req.trace.system_refs.empty()) {
            warning(path + "/derived",
                    "requirement marked derived but carries system references");
        }

        if (const auto* hist = std::get_if<HistogramComplianceCheck>(&req.check)) {
            if (!doc.find_feature(hist->feature)) {
                error(path + "/check/feature", "undeclared feature \"" + hist->feature + "\"");
            }
            check_tolerance_const(hist->tolerance_const, path + "/check/tolerance_const");
        } else if (const auto* cls = std::get_if<ClassProportionCheck>(&req.check)) {
            check_tolerance_const(cls->tolerance_const, path + "/check/tolerance_const");
            double sum = 0;
            for (const auto& [label, p] : cls->target) {
                sum += p;
                if (p < 0 || p > 1) {
                    error(path + "/check/target/" + label, "proportion must lie in [0, 1]");
                }
            }
            if (std::fabs(sum - 1.0) > kSumTolerance) {
                std::ostringstream msg;
                msg << "distribution sums to " << sum;
                error(path + "/check/target", msg.str());
            }
        } else if (const auto* size = std::get_if<DatasetSizeCheck>(&req.check)) {
            if (size->epsilon <= 0) error(path + "/check/epsilon", "epsilon must be positive");
            if (size->delta <= 0 || size->delta >= 1) {
                error(path + "/check/delta", "delta must lie in (0, 1)");
            }
            if (size->sigma_hat < 0) {
                error(path + "/check/sigma_hat", "sigma_hat must be non-negative");
            }
            if (size->range <= 0) error(path + "/check/range", "range must be positive");
        } else if (const auto* hom = std::get_if<SessionHomogeneityCheck>(&req.check)) {
            if (hom->by != "label" && !doc.find_feature(hom->by)) {
                error(path + "/check/by",
                      "\"" + hom->by + "\" is neither \"label\" nor a declared feature");
            }
            if (hom->alpha <= 0 || hom->alpha >= 1) {
                error(path + "/check/alpha", "alpha must lie in (0, 1)");
            }
        }
    }

    std::stable_sort(out.begin(), out.end(), [](const SpecDiagnostic& a, const SpecDiagnostic& b) {
        return a.path < b.path;
    });
    return out;
}

namespace {

ordered_json render_check(const CheckDescriptor& check) {
    ordered_json out;
    out["kind"] = check_kind_name(check);
    if (const auto* hist = std::get_if<HistogramComplianceCheck>(&check)) {
        out["feature"] = hist->feature;
        out["tolerance_const"] = hist->tolerance_const;
    } else if (const auto* cls = std::get_if<ClassProportionCheck>(&check)) {
        out["tolerance_const"] = cls->tolerance_const;
        ordered_json target;
        for (const auto& [label, p] : cls->target) target[label] = p;
        out["target"] = std::move(target);
        if (cls->justification) out["justification"] = *cls->justification;
    } else if (const auto* size = std::get_if<DatasetSizeCheck>(&check)) {
        out["epsilon"] = size->epsilon;
        out["delta"] = size->delta;
        out["sigma_hat"] = size->sigma_hat;
        out["range"] = size->range;
    } else if (const auto* hom = std::get_if<SessionHomogeneityCheck>(&check)) {
        out["by"] = hom->by;
        out["alpha"] = hom->alpha;
        out["session_field"] = hom->session_field;
    } else if (const auto* manual = std::get_if<ManualCheck>(&check)) {
        out["instructions"] = manual->instructions;
        out["required_role"] = manual->required_role;
    }
    return out;
}

}  // namespace

std::string render_drs(const DrsDocument& doc) {
    ordered_json root;
    root["drs_version"] = doc.version;

    ordered_json constants;
    for (const auto& [name, value] : doc.constants) constants[name] = value;
    root["constants"] = std::move(constants);

    ordered_json schema = ordered_json::array();
    for (const FieldSpec& field : doc.metadata_schema) {
        ordered_json item;
        item["name"] = field.name;
        switch (field.value_kind) {
            case ValueKind::String: item["kind"] = "string"; break;
            case ValueKind::Number: item["kind"] = "number"; break;
            case ValueKind::Timestamp: item["kind"] = "timestamp"; break;
            case ValueKind::GeoPointKind: item["kind"] = "geopoint"; break;
            case ValueKind::Identifier: item["kind"] = "identifier"; break;
        }
        item["required"] = field.required;
        if (field.allowed_values) item["allowed_values"] = *field.allowed_values;
        schema.push_back(std::move(item));
    }
    root["metadata_schema"] = std::move(schema);

    ordered_json features = ordered_json::array();
    for (const FeatureSpec& feature : doc.features) {
        ordered_json item;
        item["name"] = feature.name;
        item["source"] = render_feature_source(feature.source);
        if (feature.kind == FeatureKind::Categorical) {
            item["kind"] = "categorical";
            ordered_json target;
            // Categories were read in key order; re-emit sorted for canonical form.
            std::vector<std::size_t> order(feature.categories.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return feature.categories[a] < feature.categories[b];
            });
            for (std::size_t i : order) {
                target[feature.categories[i]] = feature.target_distribution[i];
            }
            item["target_distribution"] = std::move(target);
        } else {
            item["kind"] = "binned-continuous";
            item["buckets"] = feature.bucket_edges;
            item["target_distribution"] = feature.target_distribution;
        }
        features.push_back(std::move(item));
    }
    root["features"] = std::move(features);

    ordered_json requirements = ordered_json::array();
    for (const Requirement& req : doc.requirements) {
        ordered_json item;
        item["id"] = req.id;
        item["title"] = req.title;
        item["mode"] = req.mode == RequirementMode::Automatic ? "automatic" : "manual";
        item["check"] = render_check(req.check);
        ordered_json trace;
        trace["dds"] = req.trace.dds_refs;
        trace["system"] = req.trace.system_refs;
        item["trace"] = std::move(trace);
        item["derived"] = req.derived;
        requirements.push_back(std::move(item));
    }
    root["requirements"] = std::move(requirements);

    return root.dump(2) + "\n";
}

}  // namespace dcert
