#include "dcert/checks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "dcert/report.hpp"

namespace dcert {
namespace {

std::string bucket_label(const std::vector<double>& edges, std::size_t i) {
    std::ostringstream out;
    out << "[" << edges[i] << ", " << edges[i + 1] << (i + 2 == edges.size() ? "]" : ")");
    return out.str();
}

std::string format_number(double v) {
    std::ostringstream out;
    out << v;
    return out.str();
}

}  // namespace

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::ManualPending: return "manual_pending";
        case Verdict::Error: return "error";
    }
    return "?";
}

Histogram build_histogram(const std::vector<FeatureValue>& values, const FeatureSpec& spec) {
    Histogram hist;
    std::vector<std::size_t> counts;

    if (spec.kind == FeatureKind::BinnedContinuous) {
        const auto& edges = spec.bucket_edges;
        counts.assign(edges.size() - 1, 0);
        for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
            hist.bucket_labels.push_back(bucket_label(edges, i));
        }
        for (const FeatureValue& value : values) {
            const auto* v = std::get_if<double>(&value);
            if (!v || *v < edges.front() || *v > edges.back()) {
                ++hist.unassigned;
                continue;
            }
            // e_i <= v < e_{i+1}; the last bucket is closed on the right.
            auto it = std::upper_bound(edges.begin(), edges.end(), *v);
            std::size_t index = static_cast<std::size_t>(it - edges.begin());
            index = index == 0 ? 0 : index - 1;
            if (index >= counts.size()) index = counts.size() - 1;
            ++counts[index];
            ++hist.considered;
        }
    } else {
        counts.assign(spec.categories.size(), 0);
        hist.bucket_labels = spec.categories;
        std::map<std::string, std::size_t> index;
        for (std::size_t i = 0; i < spec.categories.size(); ++i) index[spec.categories[i]] = i;
        for (const FeatureValue& value : values) {
            const auto* v = std::get_if<std::string>(&value);
            auto it = v ? index.find(*v) : index.end();
            if (it == index.end()) {
                ++hist.unassigned;
                continue;
            }
            ++counts[it->second];
            ++hist.considered;
        }
    }

    hist.observed_proportions.resize(counts.size(), 0.0);
    if (hist.considered > 0) {
        for (std::size_t i = 0; i < counts.size(); ++i) {
            hist.observed_proportions[i] =
                static_cast<double>(counts[i]) / static_cast<double>(hist.considered);
        }
    }
    return hist;
}

CheckOutcome check_histogram_compliance(const DerivedFeature& derived,
                                        const FeatureSpec& spec, double tolerance,
                                        std::size_t total_records) {
    CheckOutcome outcome;
    if (derived.values.empty()) {
        outcome.verdict = Verdict::Error;
        outcome.diagnostics.push_back("no resolvable feature values for \"" + spec.name + "\"");
        outcome.records_excluded = total_records;
        return outcome;
    }

    std::vector<FeatureValue> values;
    values.reserve(derived.values.size());
    for (const auto& [_, value] : derived.values) values.push_back(value);

    const Histogram hist = build_histogram(values, spec);
    outcome.records_considered = hist.considered;
    outcome.records_excluded = total_records - hist.considered;

    double max_deviation = 0;
    bool fail = false;
    for (std::size_t i = 0; i < hist.bucket_labels.size(); ++i) {
        const double observed = hist.observed_proportions[i];
        const double target = spec.target_distribution[i];
        const double deviation = std::fabs(observed - target);
        max_deviation = std::max(max_deviation, deviation);
        outcome.metrics["observed." + hist.bucket_labels[i]] = observed;
        outcome.metrics["target." + hist.bucket_labels[i]] = target;
        if (deviation > tolerance) {
            fail = true;
            outcome.diagnostics.push_back("bucket " + hist.bucket_labels[i] + ": |" +
                                          format_number(observed) + " - " +
                                          format_number(target) + "| exceeds tolerance " +
                                          format_number(tolerance));
        }
    }
    outcome.metrics["max_deviation"] = max_deviation;
    outcome.metrics["tolerance"] = tolerance;

    const double excluded_fraction =
        total_records == 0
            ? 0.0
            : static_cast<double>(outcome.records_excluded) / static_cast<double>(total_records);
    outcome.metrics["excluded_fraction"] = excluded_fraction;
    if (excluded_fraction > kMaxExcludedFraction) {
        fail = true;
        outcome.diagnostics.push_back(
            format_number(excluded_fraction * 100) +
            "% of records had no resolvable feature value (limit " +
            format_number(kMaxExcludedFraction * 100) + "%)");
    }
    for (const auto& [id, reason] : derived.unresolvable) {
        if (outcome.diagnostics.size() >= 50) break;
        outcome.diagnostics.push_back("excluded " + id + ": " + reason);
    }

    outcome.verdict = fail ? Verdict::Fail : Verdict::Pass;
    return outcome;
}

CheckOutcome check_class_proportion(const DatasetManifest& manifest,
                                    const std::map<std::string, double>& target,
                                    double tolerance,
                                    const std::optional<std::string>& justification) {
    CheckOutcome outcome;
    outcome.records_considered = manifest.records.size();

    std::map<std::string, std::size_t> counts;
    for (const DatasetRecord& record : manifest.records) ++counts[record.label];
    const double total = static_cast<double>(manifest.records.size());

    bool fail = false;
    for (const auto& [label, count] : counts) {
        if (!target.count(label)) {
            fail = true;
            outcome.diagnostics.push_back("unspecified class \"" + label + "\" (" +
                                          std::to_string(count) + " records)");
        }
    }

    double max_deviation = 0;
    for (const auto& [label, target_p] : target) {
        auto it = counts.find(label);
        const double observed =
            it == counts.end() ? 0.0 : static_cast<double>(it->second) / total;
        const double deviation = std::fabs(observed - target_p);
        max_deviation = std::max(max_deviation, deviation);
        outcome.metrics["observed." + label] = observed;
        outcome.metrics["target." + label] = target_p;
        if (deviation > tolerance) {
            fail = true;
            outcome.diagnostics.push_back("class \"" + label + "\": |" +
                                          format_number(observed) + " - " +
                                          format_number(target_p) + "| exceeds tolerance " +
                                          format_number(tolerance));
        }
    }
    outcome.metrics["max_deviation"] = max_deviation;
    outcome.metrics["tolerance"] = tolerance;

    // A justified deviation stays a Fail; the justification travels with the
    // outcome for the reviewer.
    if (fail && justification) {
        outcome.diagnostics.push_back("justification: " + *justification);
    }
    outcome.verdict = fail ? Verdict::Fail : Verdict::Pass;
    return outcome;
}

CheckOutcome check_dataset_size(const DatasetManifest& manifest, const DatasetSizeCheck& bound) {
    CheckOutcome outcome;
    outcome.records_considered = manifest.records.size();

    const std::size_t test_records = static_cast<std::size_t>(
        std::count_if(manifest.records.begin(), manifest.records.end(),
                      [](const DatasetRecord& r) { return r.split == Split::Test; }));
    const std::uint64_t required =
        required_sample_size(bound.epsilon, bound.delta, bound.sigma_hat, bound.range);

    outcome.metrics["test_records"] = static_cast<double>(test_records);
    outcome.metrics["required_records"] = static_cast<double>(required);
    if (test_records >= required) {
        outcome.verdict = Verdict::Pass;
    } else {
        outcome.verdict = Verdict::Fail;
        outcome.diagnostics.push_back("test split holds " + std::to_string(test_records) +
                                      " records, " + std::to_string(required) +
                                      " required for epsilon " + format_number(bound.epsilon) +
                                      " at confidence " + format_number(1 - bound.delta));
    }
    return outcome;
}

CheckOutcome check_split_integrity(const DatasetManifest& manifest) {
    CheckOutcome outcome;
    outcome.records_considered = manifest.records.size();

    for (const DatasetRecord& record : manifest.records) {
        if (record.group.empty()) {
            outcome.verdict = Verdict::Error;
            outcome.diagnostics.push_back("record " + record.id + " has no group id");
            return outcome;
        }
    }

    std::map<std::string, std::set<Split>> splits_by_group;
    for (const DatasetRecord& record : manifest.records) {
        splits_by_group[record.group].insert(record.split);
    }

    std::vector<std::string> leaking;
    for (const auto& [group, splits] : splits_by_group) {
        if (splits.size() > 1) leaking.push_back(group);
    }

    outcome.metrics["groups"] = static_cast<double>(splits_by_group.size());
    outcome.metrics["leaking_groups"] = static_cast<double>(leaking.size());
    for (std::size_t i = 0; i < leaking.size() && i < 50; ++i) {
        outcome.diagnostics.push_back("group \"" + leaking[i] + "\" spans multiple splits");
    }
    if (leaking.size() > 50) {
        outcome.diagnostics.push_back("... " + std::to_string(leaking.size() - 50) + " more");
    }
    outcome.verdict = leaking.empty() ? Verdict::Pass : Verdict::Fail;
    return outcome;
}

namespace {

bool value_matches_kind(const MetaValue& value, ValueKind kind) {
    switch (kind) {
        case ValueKind::String:
        case ValueKind::Identifier:
            // Strings that happen to look like timestamps parse as UtcTime.
            return std::holds_alternative<std::string>(value) ||
                   std::holds_alternative<UtcTime>(value);
        case ValueKind::Number:
            return std::holds_alternative<double>(value);
        case ValueKind::Timestamp:
            return std::holds_alternative<UtcTime>(value);
        case ValueKind::GeoPointKind:
            return std::holds_alternative<GeoPoint>(value);
    }
    return false;
}

const std::string* string_of(const MetaValue& value) {
    if (const auto* s = std::get_if<std::string>(&value)) return s;
    if (const auto* t = std::get_if<UtcTime>(&value)) return &t->text;
    return nullptr;
}

}  // namespace

CheckOutcome check_metadata_conformity(const DatasetManifest& manifest,
                                       const std::vector<FieldSpec>& schema) {
    CheckOutcome outcome;
    outcome.records_considered = manifest.records.size();

    bool fail = false;
    for (const FieldSpec& field : schema) {
        std::size_t missing = 0, bad_kind = 0, bad_value = 0, present = 0;
        for (const DatasetRecord& record : manifest.records) {
            auto it = record.meta.find(field.name);
            if (it == record.meta.end()) {
                if (field.required) ++missing;
                continue;
            }
            ++present;
            if (!value_matches_kind(it->second, field.value_kind)) {
                ++bad_kind;
                continue;
            }
            if (field.allowed_values) {
                const std::string* text = string_of(it->second);
                if (!text || std::find(field.allowed_values->begin(),
                                       field.allowed_values->end(),
                                       *text) == field.allowed_values->end()) {
                    ++bad_value;
                }
            }
        }
        if (missing > 0) {
            fail = true;
            outcome.metrics["missing." + field.name] = static_cast<double>(missing);
            outcome.diagnostics.push_back("field \"" + field.name + "\": " +
                                          std::to_string(missing) + " records missing");
        }
        if (bad_kind > 0) {
            fail = true;
            outcome.metrics["bad_kind." + field.name] = static_cast<double>(bad_kind);
            outcome.diagnostics.push_back("field \"" + field.name + "\": " +
                                          std::to_string(bad_kind) + " values of wrong kind");
        }
        if (bad_value > 0) {
            fail = true;
            outcome.metrics["bad_value." + field.name] = static_cast<double>(bad_value);
            outcome.diagnostics.push_back("field \"" + field.name + "\": " +
                                          std::to_string(bad_value) +
                                          " values outside the allowed set");
        }
        if (!field.required && present == 0) {
            outcome.diagnostics.push_back("optional field \"" + field.name +
                                          "\" absent from every record");
        }
    }
    outcome.verdict = fail ? Verdict::Fail : Verdict::Pass;
    return outcome;
}

CheckOutcome check_session_homogeneity(const DatasetManifest& manifest,
                                       const SessionHomogeneityCheck& params,
                                       const DrsDocument& doc) {
    CheckOutcome outcome;

    // Category per record: the label, or a declared feature's value.
    std::vector<std::pair<std::string, std::string>> session_and_category;
    std::size_t excluded = 0;
    auto session_of = [&](const DatasetRecord& record) -> std::optional<std::string> {
        if (params.session_field == "group") return record.group;
        auto it = record.meta.find(params.session_field);
        if (it == record.meta.end()) return std::nullopt;
        const std::string* text = string_of(it->second);
        if (!text) return std::nullopt;
        return *text;
    };

    std::vector<std::string> ordered_categories;
    if (params.by == "label") {
        std::set<std::string> labels;
        for (const DatasetRecord& record : manifest.records) {
            auto session = session_of(record);
            if (!session) {
                ++excluded;
                continue;
            }
            labels.insert(record.label);
            session_and_category.emplace_back(*session, record.label);
        }
        ordered_categories.assign(labels.begin(), labels.end());
    } else {
        const FeatureSpec* feature = doc.find_feature(params.by);
        if (!feature) {
            outcome.verdict = Verdict::Error;
            outcome.diagnostics.push_back("unknown feature \"" + params.by + "\"");
            return outcome;
        }
        const DerivedFeature derived = derive_feature(manifest, *feature, doc);
        excluded += derived.unresolvable.size();
        std::map<std::string, const DatasetRecord*> by_id;
        for (const DatasetRecord& record : manifest.records) by_id[record.id] = &record;
        if (feature->kind == FeatureKind::BinnedContinuous) {
            const auto& edges = feature->bucket_edges;
            for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
                ordered_categories.push_back(bucket_label(edges, i));
            }
            for (const auto& [id, value] : derived.values) {
                auto session = session_of(*by_id.at(id));
                const auto* v = std::get_if<double>(&value);
                if (!session || !v || *v < edges.front() || *v > edges.back()) {
                    ++excluded;
                    continue;
                }
                auto it = std::upper_bound(edges.begin(), edges.end(), *v);
                std::size_t index = static_cast<std::size_t>(it - edges.begin());
                index = index == 0 ? 0 : index - 1;
                if (index + 1 >= edges.size()) index = edges.size() - 2;
                session_and_category.emplace_back(*session, ordered_categories[index]);
            }
        } else {
            ordered_categories = feature->categories;
            std::set<std::string> known(ordered_categories.begin(), ordered_categories.end());
            for (const auto& [id, value] : derived.values) {
                auto session = session_of(*by_id.at(id));
                const auto* v = std::get_if<std::string>(&value);
                if (!session || !v || !known.count(*v)) {
                    ++excluded;
                    continue;
                }
                session_and_category.emplace_back(*session, *v);
            }
        }
    }

    outcome.records_considered = session_and_category.size();
    outcome.records_excluded = excluded;

    std::set<std::string> session_set;
    for (const auto& [session, _] : session_and_category) session_set.insert(session);
    if (session_set.size() < 2) {
        outcome.verdict = Verdict::Error;
        outcome.diagnostics.push_back("homogeneity undefined for one session");
        return outcome;
    }

    // Contingency table: sessions x categories.
    std::vector<std::string> sessions(session_set.begin(), session_set.end());
    std::map<std::string, std::size_t> session_index, category_index;
    for (std::size_t i = 0; i < sessions.size(); ++i) session_index[sessions[i]] = i;
    for (std::size_t i = 0; i < ordered_categories.size(); ++i) {
        category_index[ordered_categories[i]] = i;
    }
    std::vector<std::vector<double>> table(sessions.size(),
                                           std::vector<double>(ordered_categories.size(), 0.0));
    for (const auto& [session, category] : session_and_category) {
        table[session_index.at(session)][category_index.at(category)] += 1.0;
    }

    // Merge sparse categories (adjacent, toward the lower index) until every
    // expected cell count reaches 5.
    std::vector<std::vector<std::size_t>> column_members;
    for (std::size_t i = 0; i < ordered_categories.size(); ++i) column_members.push_back({i});
    const double total = static_cast<double>(session_and_category.size());

    auto expected_ok = [&]() {
        std::vector<double> row_totals(table.size(), 0.0);
        std::vector<double> col_totals(table[0].size(), 0.0);
        for (std::size_t r = 0; r < table.size(); ++r) {
            for (std::size_t c = 0; c < table[r].size(); ++c) {
                row_totals[r] += table[r][c];
                col_totals[c] += table[r][c];
            }
        }
        for (double rt : row_totals) {
            for (double ct : col_totals) {
                if (rt * ct / total < 5.0) return false;
            }
        }
        return true;
    };

    while (!expected_ok() && table[0].size() > 1) {
        std::vector<double> col_totals(table[0].size(), 0.0);
        for (const auto& row : table) {
            for (std::size_t c = 0; c < row.size(); ++c) col_totals[c] += row[c];
        }
        const std::size_t smallest = static_cast<std::size_t>(
            std::min_element(col_totals.begin(), col_totals.end()) - col_totals.begin());
        const std::size_t into = smallest > 0 ? smallest - 1 : smallest + 1;
        const std::size_t lo = std::min(smallest, into);
        const std::size_t hi = std::max(smallest, into);
        for (auto& row : table) {
            row[lo] += row[hi];
            row.erase(row.begin() + static_cast<std::ptrdiff_t>(hi));
        }
        column_members[lo].insert(column_members[lo].end(), column_members[hi].begin(),
                                  column_members[hi].end());
        column_members.erase(column_members.begin() + static_cast<std::ptrdiff_t>(hi));
    }

    if (!expected_ok() || table[0].size() < 2) {
        outcome.verdict = Verdict::Error;
        outcome.diagnostics.push_back(
            "expected cell counts below 5 even after merging buckets");
        return outcome;
    }

    std::vector<double> row_totals(table.size(), 0.0);
    std::vector<double> col_totals(table[0].size(), 0.0);
    for (std::size_t r = 0; r < table.size(); ++r) {
        for (std::size_t c = 0; c < table[r].size(); ++c) {
            row_totals[r] += table[r][c];
            col_totals[c] += table[r][c];
        }
    }
    double statistic = 0;
    for (std::size_t r = 0; r < table.size(); ++r) {
        for (std::size_t c = 0; c < table[r].size(); ++c) {
            const double expected = row_totals[r] * col_totals[c] / total;
            const double diff = table[r][c] - expected;
            statistic += diff * diff / expected;
        }
    }
    const unsigned dof = static_cast<unsigned>((table.size() - 1) * (table[0].size() - 1));
    const double p = chi_square_pvalue(statistic, dof);

    outcome.metrics["statistic"] = statistic;
    outcome.metrics["dof"] = static_cast<double>(dof);
    outcome.metrics["p_value"] = p;
    outcome.metrics["sessions"] = static_cast<double>(sessions.size());
    outcome.metrics["alpha"] = params.alpha;
    if (p < params.alpha) {
        outcome.verdict = Verdict::Fail;
        outcome.diagnostics.push_back(
            "distribution differs across sessions (p " + format_number(p) + " < alpha " +
            format_number(params.alpha) + "); necessary condition for i.i.d. data violated");
    } else {
        outcome.verdict = Verdict::Pass;
    }
    return outcome;
}

VerificationReport run_all(const DrsDocument& drs, const DatasetManifest& manifest,
                           const DdsCatalog& catalog) {
    (void)catalog;  // trace resolution is validated up front and rendered in the matrix
    VerificationReport report;
    report.drs_version = drs.version;
    report.dataset_digest = manifest.digest;

    for (const Requirement& req : drs.requirements) {
        CheckOutcome outcome;
        try {
            if (const auto* hist = std::get_if<HistogramComplianceCheck>(&req.check)) {
                const FeatureSpec* feature = drs.find_feature(hist->feature);
                auto tolerance = drs.find_constant(hist->tolerance_const);
                if (!feature || !tolerance) {
                    outcome.verdict = Verdict::Error;
                    outcome.diagnostics.push_back(!feature
                                                      ? "unknown feature \"" + hist->feature + "\""
                                                      : "undefined constant \"" +
                                                            hist->tolerance_const + "\"");
                } else {
                    const DerivedFeature derived = derive_feature(manifest, *feature, drs);
                    outcome = check_histogram_compliance(derived, *feature, *tolerance,
                                                         manifest.records.size());
                }
            } else if (const auto* cls = std::get_if<ClassProportionCheck>(&req.check)) {
                auto tolerance = drs.find_constant(cls->tolerance_const);
                if (!tolerance) {
                    outcome.verdict = Verdict::Error;
                    outcome.diagnostics.push_back("undefined constant \"" + cls->tolerance_const +
                                                  "\"");
                } else {
                    outcome = check_class_proportion(manifest, cls->target, *tolerance,
                                                     cls->justification);
                }
            } else if (const auto* size = std::get_if<DatasetSizeCheck>(&req.check)) {
                outcome = check_dataset_size(manifest, *size);
            } else if (std::holds_alternative<SplitIntegrityCheck>(req.check)) {
                outcome = check_split_integrity(manifest);
            } else if (std::holds_alternative<MetadataConformityCheck>(req.check)) {
                outcome = check_metadata_conformity(manifest, drs.metadata_schema);
            } else if (const auto* hom = std::get_if<SessionHomogeneityCheck>(&req.check)) {
                outcome = check_session_homogeneity(manifest, *hom, drs);
            } else {
                const auto& manual = std::get<ManualCheck>(req.check);
                outcome.verdict = Verdict::ManualPending;
                outcome.diagnostics.push_back("instructions: " + manual.instructions);
                outcome.diagnostics.push_back("required role: " + manual.required_role);
            }
        } catch (const std::exception& e) {
            outcome.verdict = Verdict::Error;
            outcome.diagnostics.push_back(e.what());
        }
        outcome.requirement_id = req.id;
        report.outcomes.push_back(std::move(outcome));
    }

    std::sort(report.outcomes.begin(), report.outcomes.end(),
              [](const CheckOutcome& a, const CheckOutcome& b) {
                  return a.requirement_id < b.requirement_id;
              });
    report.recompute_summary();
    return report;
}

}  // namespace dcert
