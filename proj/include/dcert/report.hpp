#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dcert/checks.hpp"
#include "dcert/drs.hpp"
#include "dcert/manifest.hpp"

namespace dcert {

enum class InspectorRole { ApplicationExpert, AcquisitionSystemExpert, MachineLearningExpert };

const char* role_name(InspectorRole role);
std::optional<InspectorRole> parse_role(const std::string& name);

/// A recorded manual verification verdict. Inspectors attest Pass or Fail,
/// never pending.
struct Attestation {
    std::string requirement_id;
    std::string inspector_name;
    InspectorRole role = InspectorRole::ApplicationExpert;
    Verdict verdict = Verdict::Pass;  // Pass or Fail only
    std::string evidence;
    UtcTime timestamp;

    bool operator==(const Attestation&) const = default;
};

/// Parses a JSON array of attestation objects. Throws ParseError.
std::vector<Attestation> parse_attestations(const std::string& text);

struct ReportSummary {
    std::size_t passed = 0;
    std::size_t failed = 0;
    std::size_t pending = 0;
    std::size_t errored = 0;
};

struct AppliedAttestation {
    Attestation attestation;
    bool accepted = false;
    std::string reject_reason;  // empty when accepted
};

struct VerificationReport {
    std::string drs_version;
    Digest dataset_digest{};
    std::vector<CheckOutcome> outcomes;  // sorted by requirement id
    std::vector<AppliedAttestation> attestations;
    ReportSummary summary;

    const CheckOutcome* find_outcome(const std::string& requirement_id) const;
    void recompute_summary();
};

struct TraceRow {
    std::string requirement_id;
    std::vector<std::string> dds_refs;
    std::vector<std::string> system_refs;
    Verdict verdict = Verdict::Error;
    bool derived = false;
};

/// Applies attestations to ManualPending outcomes. Attestations targeting
/// automatic requirements, unknown requirements, wrong roles, or a
/// requirement already attested differently are recorded as rejected.
/// Idempotent: merging the same set twice equals merging it once.
VerificationReport merge_attestations(VerificationReport report,
                                      const std::vector<Attestation>& attestations,
                                      const DrsDocument& drs);

/// One row per requirement, sorted by id; requirements with no system refs
/// are flagged derived.
std::vector<TraceRow> traceability_matrix(const DrsDocument& drs,
                                          const VerificationReport& report);

enum class ReportFormat { Json, Text };

/// Canonical rendering: stable key order and number formatting, byte-identical
/// across runs on identical inputs.
std::string render_report(const VerificationReport& report, const std::vector<TraceRow>& matrix,
                          ReportFormat format);

/// 0 iff nothing failed/errored and nothing pending (or pending allowed);
/// 1 on any Fail/Error; 3 when only pending outcomes block.
int exit_code(const VerificationReport& report, bool allow_pending);

}  // namespace dcert
