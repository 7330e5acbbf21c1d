#include "dcert/report.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "dcert/diagnostics.hpp"

namespace dcert {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

}  // namespace

const char* role_name(InspectorRole role) {
    switch (role) {
        case InspectorRole::ApplicationExpert: return "application_expert";
        case InspectorRole::AcquisitionSystemExpert: return "acquisition_system_expert";
        case InspectorRole::MachineLearningExpert: return "machine_learning_expert";
    }
    return "?";
}

std::optional<InspectorRole> parse_role(const std::string& name) {
    if (name == "application_expert") return InspectorRole::ApplicationExpert;
    if (name == "acquisition_system_expert") return InspectorRole::AcquisitionSystemExpert;
    if (name == "machine_learning_expert") return InspectorRole::MachineLearningExpert;
    return std::nullopt;
}

std::vector<Attestation> parse_attestations(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("attestations: " + std::string(e.what()), "");
    }
    if (!root.is_array()) throw ParseError("attestations root must be a JSON array", "");

    std::vector<Attestation> out;
    for (std::size_t i = 0; i < root.size(); ++i) {
        const std::string path = "/" + std::to_string(i);
        const json& item = root[i];
        if (!item.is_object()) throw ParseError("attestation must be an object", path);

        Attestation att;
        if (!item.contains("requirement_id") || !item["requirement_id"].is_string()) {
            throw ParseError("missing requirement_id", path);
        }
        att.requirement_id = item["requirement_id"].get<std::string>();

        if (!item.contains("inspector") || !item["inspector"].is_object()) {
            throw ParseError("missing inspector", path);
        }
        const json& inspector = item["inspector"];
        att.inspector_name = inspector.value("name", "");
        if (att.inspector_name.empty()) {
            throw ParseError("inspector name must be non-empty", path + "/inspector/name");
        }
        auto role = parse_role(inspector.value("role", ""));
        if (!role) {
            throw ParseError("unknown inspector role \"" + inspector.value("role", "") + "\"",
                             path + "/inspector/role");
        }
        att.role = *role;

        const std::string verdict = item.value("verdict", "");
        if (verdict == "pass") {
            att.verdict = Verdict::Pass;
        } else if (verdict == "fail") {
            att.verdict = Verdict::Fail;
        } else {
            // An inspector attests pass or fail, never pending.
            throw ParseError("attestation verdict must be \"pass\" or \"fail\"",
                             path + "/verdict");
        }

        att.evidence = item.value("evidence", "");
        auto timestamp = parse_utc(item.value("timestamp", ""));
        if (!timestamp) {
            throw ParseError("timestamp must be \"YYYY-MM-DDThh:mm:ssZ\"", path + "/timestamp");
        }
        att.timestamp = *timestamp;
        out.push_back(std::move(att));
    }
    return out;
}

const CheckOutcome* VerificationReport::find_outcome(const std::string& requirement_id) const {
    auto it = std::find_if(outcomes.begin(), outcomes.end(), [&](const CheckOutcome& o) {
        return o.requirement_id == requirement_id;
    });
    return it == outcomes.end() ? nullptr : &*it;
}

void VerificationReport::recompute_summary() {
    summary = {};
    for (const CheckOutcome& outcome : outcomes) {
        switch (outcome.verdict) {
            case Verdict::Pass: ++summary.passed; break;
            case Verdict::Fail: ++summary.failed; break;
            case Verdict::ManualPending: ++summary.pending; break;
            case Verdict::Error: ++summary.errored; break;
        }
    }
}

VerificationReport merge_attestations(VerificationReport report,
                                      const std::vector<Attestation>& attestations,
                                      const DrsDocument& drs) {
    for (const Attestation& att : attestations) {
        // Idempotence: an attestation already applied (or already recorded as
        // rejected) is skipped wholesale.
        if (std::any_of(report.attestations.begin(), report.attestations.end(),
                        [&](const AppliedAttestation& a) { return a.attestation == att; })) {
            continue;
        }

        auto record_rejection = [&](const std::string& reason) {
            report.attestations.push_back({att, false, reason});
        };

        auto req_it = std::find_if(drs.requirements.begin(), drs.requirements.end(),
                                   [&](const Requirement& r) { return r.id == att.requirement_id; });
        if (req_it == drs.requirements.end()) {
            record_rejection("unknown requirement \"" + att.requirement_id + "\"");
            continue;
        }
        if (req_it->mode != RequirementMode::Manual) {
            record_rejection("cannot attest automatic check \"" + att.requirement_id + "\"");
            continue;
        }
        const auto& manual = std::get<ManualCheck>(req_it->check);
        if (role_name(att.role) != manual.required_role) {
            record_rejection("requirement requires role " + manual.required_role + ", got " +
                             role_name(att.role));
            continue;
        }

        auto out_it = std::find_if(report.outcomes.begin(), report.outcomes.end(),
                                   [&](const CheckOutcome& o) {
                                       return o.requirement_id == att.requirement_id;
                                   });
        if (out_it == report.outcomes.end()) {
            record_rejection("requirement \"" + att.requirement_id + "\" not in report");
            continue;
        }
        if (out_it->verdict != Verdict::ManualPending) {
            // Conflicting attestations on one requirement are rejected, not
            // arbitrated.
            record_rejection("requirement \"" + att.requirement_id + "\" already attested");
            continue;
        }

        out_it->verdict = att.verdict;
        out_it->diagnostics.push_back("attested by " + att.inspector_name + " (" +
                                      role_name(att.role) + ") at " + att.timestamp.text);
        if (!att.evidence.empty()) {
            out_it->diagnostics.push_back("evidence: " + att.evidence);
        }
        report.attestations.push_back({att, true, ""});
    }
    report.recompute_summary();
    return report;
}

std::vector<TraceRow> traceability_matrix(const DrsDocument& drs,
                                          const VerificationReport& report) {
    std::vector<TraceRow> rows;
    for (const Requirement& req : drs.requirements) {
        TraceRow row;
        row.requirement_id = req.id;
        row.dds_refs = req.trace.dds_refs;
        row.system_refs = req.trace.system_refs;
        row.derived = req.trace.system_refs.empty();
        if (const CheckOutcome* outcome = report.find_outcome(req.id)) {
            row.verdict = outcome->verdict;
        }
        rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end(), [](const TraceRow& a, const TraceRow& b) {
        return a.requirement_id < b.requirement_id;
    });
    return rows;
}

namespace {

ordered_json outcome_to_json(const CheckOutcome& outcome) {
    ordered_json out;
    out["requirement_id"] = outcome.requirement_id;
    out["verdict"] = verdict_name(outcome.verdict);
    json metrics;  // sorted keys
    for (const auto& [name, value] : outcome.metrics) metrics[name] = value;
    out["metrics"] = std::move(metrics);
    out["diagnostics"] = outcome.diagnostics;
    out["records_considered"] = outcome.records_considered;
    out["records_excluded"] = outcome.records_excluded;
    return out;
}

std::string render_json(const VerificationReport& report, const std::vector<TraceRow>& matrix) {
    ordered_json root;
    root["drs_version"] = report.drs_version;
    root["dataset_digest"] = hex(report.dataset_digest);

    ordered_json outcomes = ordered_json::array();
    for (const CheckOutcome& outcome : report.outcomes) {
        outcomes.push_back(outcome_to_json(outcome));
    }
    root["outcomes"] = std::move(outcomes);

    ordered_json trace = ordered_json::array();
    for (const TraceRow& row : matrix) {
        ordered_json item;
        item["requirement_id"] = row.requirement_id;
        item["dds_refs"] = row.dds_refs;
        item["system_refs"] = row.system_refs;
        item["verdict"] = verdict_name(row.verdict);
        item["derived"] = row.derived;
        trace.push_back(std::move(item));
    }
    root["trace"] = std::move(trace);

    ordered_json summary;
    summary["passed"] = report.summary.passed;
    summary["failed"] = report.summary.failed;
    summary["pending"] = report.summary.pending;
    summary["errored"] = report.summary.errored;
    root["summary"] = std::move(summary);

    ordered_json attestations = ordered_json::array();
    for (const AppliedAttestation& applied : report.attestations) {
        ordered_json item;
        item["requirement_id"] = applied.attestation.requirement_id;
        ordered_json inspector;
        inspector["name"] = applied.attestation.inspector_name;
        inspector["role"] = role_name(applied.attestation.role);
        item["inspector"] = std::move(inspector);
        item["verdict"] = applied.attestation.verdict == Verdict::Pass ? "pass" : "fail";
        item["evidence"] = applied.attestation.evidence;
        item["timestamp"] = applied.attestation.timestamp.text;
        item["accepted"] = applied.accepted;
        if (!applied.accepted) item["reject_reason"] = applied.reject_reason;
        attestations.push_back(std::move(item));
    }
    root["attestations"] = std::move(attestations);

    return root.dump(2) + "\n";
}

std::string render_text(const VerificationReport& report, const std::vector<TraceRow>& matrix) {
    std::ostringstream out;
    out << "Dataset verification report\n";
    out << "DRS version:    " << report.drs_version << "\n";
    out << "Dataset digest: " << hex(report.dataset_digest) << "\n\n";

    for (const CheckOutcome& outcome : report.outcomes) {
        std::string verdict = verdict_name(outcome.verdict);
        std::transform(verdict.begin(), verdict.end(), verdict.begin(),
                       [](unsigned char c) { return std::toupper(c); });
        out << verdict << "  " << outcome.requirement_id;
        auto max_dev = outcome.metrics.find("max_deviation");
        if (max_dev != outcome.metrics.end()) {
            out << "  (max deviation " << max_dev->second << ")";
        }
        out << "\n";
        out << "  considered " << outcome.records_considered << ", excluded "
            << outcome.records_excluded << "\n";
        for (const auto& [name, value] : outcome.metrics) {
            out << "  " << name << " = " << value << "\n";
        }
        for (const std::string& diag : outcome.diagnostics) {
            out << "  - " << diag << "\n";
        }
    }

    out << "\nTraceability\n";
    for (const TraceRow& row : matrix) {
        out << "  " << row.requirement_id << " -> dds[";
        for (std::size_t i = 0; i < row.dds_refs.size(); ++i) {
            if (i) out << ", ";
            out << row.dds_refs[i];
        }
        out << "] system[";
        for (std::size_t i = 0; i < row.system_refs.size(); ++i) {
            if (i) out << ", ";
            out << row.system_refs[i];
        }
        out << "] " << verdict_name(row.verdict);
        if (row.derived) out << " (derived)";
        out << "\n";
    }

    out << "\nSummary: " << report.summary.passed << " passed, " << report.summary.failed
        << " failed, " << report.summary.pending << " pending, " << report.summary.errored
        << " errored\n";
    return out.str();
}

}  // namespace

std::string render_report(const VerificationReport& report, const std::vector<TraceRow>& matrix,
                          ReportFormat format) {
    return format == ReportFormat::Json ? render_json(report, matrix)
                                        : render_text(report, matrix);
}

int exit_code(const VerificationReport& report, bool allow_pending) {
    if (report.summary.failed > 0 || report.summary.errored > 0) return 1;
    if (report.summary.pending > 0 && !allow_pending) return 3;
    return 0;
}

}  // namespace dcert
