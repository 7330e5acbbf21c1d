#include <doctest.h>

#include <json.hpp>

#include "dcert/fixture.hpp"
#include "dcert/report.hpp"
#include "support.hpp"

using namespace dcert;

namespace {

std::string drs_text() {
    return R"({
  "drs_version": "1.0",
  "metadata_schema": [
    {"name": "gps", "kind": "geopoint", "required": true},
    {"name": "time", "kind": "timestamp", "required": true}
  ],
  "requirements": [
    {"id": "REQ-101", "title": "split", "mode": "automatic",
     "check": {"kind": "split_integrity"},
     "trace": {"dds": ["REC-42-2"], "system": ["SYS-4"]}, "derived": false},
    {"id": "REQ-301", "title": "annotation review", "mode": "manual",
     "check": {"kind": "manual", "instructions": "review annotations",
               "required_role": "machine_learning_expert"},
     "trace": {"dds": ["REC-21-3"], "system": []}, "derived": true},
    {"id": "REQ-302", "title": "acquisition chain review", "mode": "manual",
     "check": {"kind": "manual", "instructions": "compare camera rigs",
               "required_role": "acquisition_system_expert"},
     "trace": {"dds": ["REC-21-1"], "system": []}, "derived": true}
  ]
})";
}

struct Setup {
    DrsDocument doc;
    DatasetManifest manifest;
    VerificationReport report;

    Setup() : doc(parse_drs(drs_text())) {
        FixtureParams params;
        params.n_records = 60;
        params.n_groups = 6;
        params.class_fractions = {{"red", 0.5}, {"green", 0.5}};
        manifest = generate_fixture(21, params);
        report = run_all(doc, manifest, builtin_catalog());
    }
};

Attestation make_attestation(const std::string& requirement_id, InspectorRole role,
                             Verdict verdict = Verdict::Pass) {
    Attestation att;
    att.requirement_id = requirement_id;
    att.inspector_name = "J. Martin";
    att.role = role;
    att.verdict = verdict;
    att.evidence = "sampled 50 records, all consistent";
    att.timestamp = *parse_utc("2021-07-01T09:00:00Z");
    return att;
}

}  // namespace

TEST_CASE("matching attestation turns a pending outcome into its verdict") {
    Setup s;
    const auto merged = merge_attestations(
        s.report, {make_attestation("REQ-301", InspectorRole::MachineLearningExpert)}, s.doc);
    CHECK(merged.find_outcome("REQ-301")->verdict == Verdict::Pass);
    CHECK(merged.find_outcome("REQ-302")->verdict == Verdict::ManualPending);
    REQUIRE(merged.attestations.size() == 1);
    CHECK(merged.attestations[0].accepted);
    CHECK(merged.summary.pending == 1);
}

TEST_CASE("attesting an automatic requirement is rejected") {
    Setup s;
    const auto merged = merge_attestations(
        s.report, {make_attestation("REQ-101", InspectorRole::MachineLearningExpert)}, s.doc);
    CHECK(merged.find_outcome("REQ-101")->verdict == s.report.find_outcome("REQ-101")->verdict);
    REQUIRE(merged.attestations.size() == 1);
    CHECK_FALSE(merged.attestations[0].accepted);
    CHECK(merged.attestations[0].reject_reason.find("cannot attest automatic") !=
          std::string::npos);
}

TEST_CASE("role mismatch is rejected") {
    Setup s;
    const auto merged = merge_attestations(
        s.report, {make_attestation("REQ-301", InspectorRole::ApplicationExpert)}, s.doc);
    CHECK(merged.find_outcome("REQ-301")->verdict == Verdict::ManualPending);
    REQUIRE(merged.attestations.size() == 1);
    CHECK_FALSE(merged.attestations[0].accepted);
}

TEST_CASE("zero attestations leave the report unchanged") {
    Setup s;
    const auto merged = merge_attestations(s.report, {}, s.doc);
    const auto matrix = traceability_matrix(s.doc, s.report);
    CHECK(render_report(merged, matrix, ReportFormat::Json) ==
          render_report(s.report, matrix, ReportFormat::Json));
}

TEST_CASE("merging is idempotent") {
    Setup s;
    const std::vector<Attestation> set{
        make_attestation("REQ-301", InspectorRole::MachineLearningExpert),
        make_attestation("REQ-302", InspectorRole::AcquisitionSystemExpert, Verdict::Fail)};
    const auto once = merge_attestations(s.report, set, s.doc);
    const auto twice = merge_attestations(once, set, s.doc);
    const auto matrix = traceability_matrix(s.doc, once);
    CHECK(render_report(once, matrix, ReportFormat::Json) ==
          render_report(twice, matrix, ReportFormat::Json));
    CHECK(once.find_outcome("REQ-302")->verdict == Verdict::Fail);
}

TEST_CASE("a second, different attestation on the same requirement is rejected") {
    Setup s;
    auto first = make_attestation("REQ-301", InspectorRole::MachineLearningExpert);
    auto second = make_attestation("REQ-301", InspectorRole::MachineLearningExpert, Verdict::Fail);
    second.inspector_name = "A. Dubois";
    const auto merged = merge_attestations(s.report, {first, second}, s.doc);
    CHECK(merged.find_outcome("REQ-301")->verdict == Verdict::Pass);
    REQUIRE(merged.attestations.size() == 2);
    CHECK(merged.attestations[0].accepted);
    CHECK_FALSE(merged.attestations[1].accepted);
    CHECK(merged.attestations[1].reject_reason.find("already attested") != std::string::npos);
}

TEST_CASE("summary counts reconcile with the outcomes after every merge") {
    Setup s;
    const auto merged = merge_attestations(
        s.report, {make_attestation("REQ-301", InspectorRole::MachineLearningExpert)}, s.doc);
    ReportSummary recount;
    for (const CheckOutcome& o : merged.outcomes) {
        switch (o.verdict) {
            case Verdict::Pass: ++recount.passed; break;
            case Verdict::Fail: ++recount.failed; break;
            case Verdict::ManualPending: ++recount.pending; break;
            case Verdict::Error: ++recount.errored; break;
        }
    }
    CHECK(merged.summary.passed == recount.passed);
    CHECK(merged.summary.failed == recount.failed);
    CHECK(merged.summary.pending == recount.pending);
    CHECK(merged.summary.errored == recount.errored);
}

TEST_CASE("traceability matrix has one sorted row per requirement") {
    Setup s;
    const auto matrix = traceability_matrix(s.doc, s.report);
    REQUIRE(matrix.size() == 3);
    CHECK(matrix[0].requirement_id == "REQ-101");
    CHECK_FALSE(matrix[0].derived);  // has a system ref
    CHECK(matrix[1].requirement_id == "REQ-301");
    CHECK(matrix[1].derived);
    CHECK(matrix[1].dds_refs == std::vector<std::string>{"REC-21-3"});
    CHECK(matrix[0].verdict == s.report.find_outcome("REQ-101")->verdict);

    const auto again = traceability_matrix(s.doc, s.report);
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        CHECK(matrix[i].requirement_id == again[i].requirement_id);
        CHECK(matrix[i].verdict == again[i].verdict);
    }
}

TEST_CASE("renders are deterministic and json round-trips") {
    Setup s;
    const auto matrix = traceability_matrix(s.doc, s.report);
    const std::string a = render_report(s.report, matrix, ReportFormat::Json);
    const std::string b = render_report(s.report, matrix, ReportFormat::Json);
    CHECK(a == b);

    const auto parsed = nlohmann::json::parse(a);
    CHECK(parsed["drs_version"] == "1.0");
    CHECK(parsed["dataset_digest"] == hex(s.manifest.digest));
    CHECK(parsed["outcomes"].size() == 3);
    CHECK(parsed["trace"].size() == 3);
    CHECK(parsed["summary"]["pending"] == 2);
}

TEST_CASE("text render names failing requirements with their deviation") {
    Setup s;
    // Force a failure by leaking a group.
    FixtureParams params;
    params.n_records = 60;
    params.n_groups = 6;
    params.class_fractions = {{"red", 0.5}, {"green", 0.5}};
    params.injected_violations = {"leak_groups:1"};
    const auto manifest = generate_fixture(21, params);
    const auto report = run_all(s.doc, manifest, builtin_catalog());
    const std::string text =
        render_report(report, traceability_matrix(s.doc, report), ReportFormat::Text);
    CHECK(text.find("FAIL  REQ-101") != std::string::npos);
    CHECK(text.find("Traceability") != std::string::npos);
}

TEST_CASE("exit codes distinguish failure from pending") {
    Setup s;
    // REQ-101 passes, two manual requirements pending.
    CHECK(exit_code(s.report, false) == 3);
    CHECK(exit_code(s.report, true) == 0);

    auto all_attested = merge_attestations(
        s.report,
        {make_attestation("REQ-301", InspectorRole::MachineLearningExpert),
         make_attestation("REQ-302", InspectorRole::AcquisitionSystemExpert)},
        s.doc);
    CHECK(exit_code(all_attested, false) == 0);

    auto with_fail = merge_attestations(
        s.report,
        {make_attestation("REQ-301", InspectorRole::MachineLearningExpert, Verdict::Fail)},
        s.doc);
    CHECK(exit_code(with_fail, false) == 1);
    CHECK(exit_code(with_fail, true) == 1);
}

TEST_CASE("attestation file parsing") {
    const std::string text = R"([
      {"requirement_id": "REQ-301",
       "inspector": {"name": "J. Martin", "role": "machine_learning_expert"},
       "verdict": "pass", "evidence": "ok", "timestamp": "2021-07-01T09:00:00Z"}
    ])";
    const auto attestations = parse_attestations(text);
    REQUIRE(attestations.size() == 1);
    CHECK(attestations[0].role == InspectorRole::MachineLearningExpert);

    CHECK_THROWS_AS(parse_attestations(R"([{"requirement_id": "R", "verdict": "pass"}])"),
                    ParseError);
    // "pending" is not an attestable verdict.
    CHECK_THROWS_AS(parse_attestations(R"([
      {"requirement_id": "R", "inspector": {"name": "x", "role": "application_expert"},
       "verdict": "pending", "timestamp": "2021-07-01T09:00:00Z"}])"),
                    ParseError);
    CHECK_THROWS_AS(parse_attestations(R"([
      {"requirement_id": "R", "inspector": {"name": "x", "role": "train_driver"},
       "verdict": "pass", "timestamp": "2021-07-01T09:00:00Z"}])"),
                    ParseError);
}
