#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dcert/astro.hpp"
#include "dcert/drs.hpp"
#include "dcert/manifest.hpp"
#include "dcert/stats.hpp"

namespace dcert {

enum class Verdict { Pass, Fail, ManualPending, Error };

const char* verdict_name(Verdict v);

/// Per-requirement result. Error means the check could not be evaluated
/// (precondition violation), never a mere criterion miss.
struct CheckOutcome {
    std::string requirement_id;
    Verdict verdict = Verdict::Error;
    std::map<std::string, double> metrics;
    std::vector<std::string> diagnostics;
    std::size_t records_considered = 0;
    std::size_t records_excluded = 0;
};

/// Observed proportions over the FeatureSpec's buckets or categories.
/// Numeric values: v falls in bucket i iff edge[i] <= v < edge[i+1], last
/// bucket closed on the right.
struct Histogram {
    std::vector<std::string> bucket_labels;
    std::vector<double> observed_proportions;
    std::size_t considered = 0;
    std::size_t unassigned = 0;  // numeric values outside the edge range
};

Histogram build_histogram(const std::vector<FeatureValue>& values, const FeatureSpec& spec);

/// Largest share of records a check may exclude (unresolvable feature values)
/// before the exclusion itself fails the check.
inline constexpr double kMaxExcludedFraction = 0.05;

CheckOutcome check_histogram_compliance(const DerivedFeature& derived,
                                        const FeatureSpec& spec, double tolerance,
                                        std::size_t total_records);

CheckOutcome check_class_proportion(const DatasetManifest& manifest,
                                    const std::map<std::string, double>& target,
                                    double tolerance,
                                    const std::optional<std::string>& justification);

CheckOutcome check_dataset_size(const DatasetManifest& manifest, const DatasetSizeCheck& bound);

CheckOutcome check_split_integrity(const DatasetManifest& manifest);

CheckOutcome check_metadata_conformity(const DatasetManifest& manifest,
                                       const std::vector<FieldSpec>& schema);

CheckOutcome check_session_homogeneity(const DatasetManifest& manifest,
                                       const SessionHomogeneityCheck& params,
                                       const DrsDocument& doc);

struct VerificationReport;  // defined in report.hpp

/// Runs every requirement of the DRS against the manifest. Exactly one
/// outcome per requirement, ordered by requirement id; manual requirements
/// yield ManualPending carrying their instructions. Pure in its inputs.
VerificationReport run_all(const DrsDocument& drs, const DatasetManifest& manifest,
                           const DdsCatalog& catalog);

}  // namespace dcert
