// Acceptance suite: one test case per acceptance criterion, each printing a
// single "criterion N ... PASS|FAIL" line in addition to the doctest verdict.
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "dcert/astro.hpp"
#include "dcert/checks.hpp"
#include "dcert/fixture.hpp"
#include "dcert/report.hpp"
#include "dcert/stats.hpp"
#include "support.hpp"

using namespace dcert;
using dcert::test::Rng;
using dcert::test::run_command;
using dcert::test::write_file;

namespace {

struct Criterion {
    int number;
    const char* title;
    bool ok = true;

    ~Criterion() { std::printf("criterion %d (%s): %s\n", number, title, ok ? "PASS" : "FAIL"); }
};

#define ACC_CHECK(criterion, condition)       \
    do {                                      \
        const bool acc_value_ = (condition);  \
        CHECK(acc_value_);                    \
        (criterion).ok &= acc_value_;         \
    } while (0)

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// 1,000-record manifest whose sun-elevation histogram at a fixed location hits
// the 3-bucket quota exactly: timestamps are rejection-sampled per bucket.
// Groups are 50 records each and never span splits; labels alternate within
// each group so every acquisition session is balanced.
DatasetManifest sun_fixture(std::uint64_t seed) {
    constexpr GeoPoint kLocation{48.85, 2.35};
    const std::vector<double> edges = {-90, 0, 20, 90};
    const std::vector<std::size_t> quota = {300, 400, 300};

    Rng rng{seed};
    const auto year_start = parse_utc("2021-01-01T00:00:00Z")->instant;
    std::vector<UtcTime> times;
    for (std::size_t bucket = 0; bucket < quota.size(); ++bucket) {
        for (std::size_t i = 0; i < quota[bucket]; ++i) {
            for (;;) {
                const auto t = year_start + std::chrono::seconds(rng.below(86400ULL * 365));
                const double elevation = solar_elevation(kLocation, t);
                const bool last = bucket + 1 == quota.size();
                if (elevation >= edges[bucket] &&
                    (elevation < edges[bucket + 1] ||
                     (last && elevation <= edges[bucket + 1]))) {
                    times.push_back(make_utc(t));
                    break;
                }
            }
        }
    }
    // Shuffle the bucket assignment over record slots so that groups mix.
    std::vector<std::size_t> slot;
    for (std::size_t bucket = 0; bucket < quota.size(); ++bucket) {
        slot.insert(slot.end(), quota[bucket], bucket);
    }
    for (std::size_t i = slot.size(); i > 1; --i) {
        std::swap(slot[i - 1], slot[rng.below(i)]);
    }
    std::vector<DatasetRecord> records(1000);
    std::size_t cursor[3] = {0, 300, 700};
    for (std::size_t i = 0; i < records.size(); ++i) {
        DatasetRecord& r = records[i];
        char id[32];
        std::snprintf(id, sizeof id, "img-%04zu", i);
        r.id = id;
        const std::size_t group = i / 50;  // 20 groups of 50
        r.split = group < 14 ? Split::Train : (group < 17 ? Split::Validation : Split::Test);
        r.group = "session-" + std::to_string(group);
        r.label = i % 2 ? "green" : "red";
        r.meta["gps"] = kLocation;
        r.meta["time"] = times[cursor[slot[i]]++];
        r.meta["camera_model"] = std::string("CAM-A");
    }
    DatasetManifest manifest;
    manifest.records = std::move(records);
    manifest.digest = dataset_digest(manifest.records);
    return manifest;
}

const char* kSunDrs = R"json({
  "drs_version": "1.0",
  "constants": {"cDRS_SunElev_BucketTolerance": 0.1},
  "metadata_schema": [
    {"name": "gps", "kind": "geopoint", "required": true},
    {"name": "time", "kind": "timestamp", "required": true}
  ],
  "features": [
    {"name": "sun_elevation", "source": "solar_elevation(gps, time)",
     "kind": "binned-continuous", "buckets": [-90, 0, 20, 90],
     "target_distribution": [0.3, 0.4, 0.3]}
  ],
  "requirements": [
    {"id": "REQ-101", "title": "Sun elevation representativeness", "mode": "automatic",
     "check": {"kind": "histogram_compliance", "feature": "sun_elevation",
               "tolerance_const": "cDRS_SunElev_BucketTolerance"},
     "trace": {"dds": ["REC-10-1"], "system": []}, "derived": true}
  ]
})json";

const char* kFullDrs = R"json({
  "drs_version": "1.0",
  "constants": {"cDRS_SunElev_BucketTolerance": 0.1, "cDRS_ClassTolerance": 0.1},
  "metadata_schema": [
    {"name": "gps", "kind": "geopoint", "required": true},
    {"name": "time", "kind": "timestamp", "required": true},
    {"name": "camera_model", "kind": "string", "required": true, "allowed_values": ["CAM-A"]}
  ],
  "features": [
    {"name": "sun_elevation", "source": "solar_elevation(gps, time)",
     "kind": "binned-continuous", "buckets": [-90, 0, 20, 90],
     "target_distribution": [0.3, 0.4, 0.3]}
  ],
  "requirements": [
    {"id": "REQ-101", "title": "Sun elevation representativeness", "mode": "automatic",
     "check": {"kind": "histogram_compliance", "feature": "sun_elevation",
               "tolerance_const": "cDRS_SunElev_BucketTolerance"},
     "trace": {"dds": ["REC-10-1"], "system": []}, "derived": true},
    {"id": "REQ-102", "title": "Class proportions", "mode": "automatic",
     "check": {"kind": "class_proportion", "tolerance_const": "cDRS_ClassTolerance",
               "target": {"red": 0.5, "green": 0.5}},
     "trace": {"dds": ["REC-21-3"], "system": []}, "derived": true},
    {"id": "REQ-103", "title": "Test split size", "mode": "automatic",
     "check": {"kind": "dataset_size", "epsilon": 0.25, "delta": 0.05,
               "sigma_hat": 0.5, "range": 1.0},
     "trace": {"dds": ["REC-21-4"], "system": []}, "derived": true},
    {"id": "REQ-104", "title": "No split leakage", "mode": "automatic",
     "check": {"kind": "split_integrity"},
     "trace": {"dds": ["REC-42-2"], "system": []}, "derived": true},
    {"id": "REQ-105", "title": "Metadata conformity", "mode": "automatic",
     "check": {"kind": "metadata_conformity"},
     "trace": {"dds": ["REC-21-1"], "system": []}, "derived": true},
    {"id": "REQ-106", "title": "Session homogeneity", "mode": "automatic",
     "check": {"kind": "session_homogeneity", "by": "label", "alpha": 0.05},
     "trace": {"dds": ["REC-21.2"], "system": []}, "derived": true},
    {"id": "REQ-107", "title": "Annotation review", "mode": "manual",
     "check": {"kind": "manual", "instructions": "Review 50 sampled annotations",
               "required_role": "machine_learning_expert"},
     "trace": {"dds": ["OBJ-21.1"], "system": []}, "derived": true}
  ]
})json";

std::filesystem::path work_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "dcert_acceptance";
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("criterion 1: sun-elevation histogram reproduction") {
    Criterion c{1, "sun-elevation histogram, 0.1 tolerance"};
    const auto start = Clock::now();

    const DrsDocument doc = parse_drs(kSunDrs);
    DatasetManifest manifest = sun_fixture(101);

    const VerificationReport compliant = run_all(doc, manifest, builtin_catalog());
    ACC_CHECK(c, compliant.outcomes.size() == 1);
    ACC_CHECK(c, compliant.outcomes[0].verdict == Verdict::Pass);
    ACC_CHECK(c, compliant.outcomes[0].metrics.at("max_deviation") <= 0.05);

    // Move 150 records out of the middle bucket into the top one: the middle
    // bucket's deviation becomes 0.15, past the 10% decision criterion.
    std::size_t moved = 0;
    for (DatasetRecord& r : manifest.records) {
        if (moved == 150) break;
        const double elevation = solar_elevation(std::get<GeoPoint>(r.meta.at("gps")),
                                                 std::get<UtcTime>(r.meta.at("time")).instant);
        if (elevation >= 0 && elevation < 20) {
            r.meta["time"] = *parse_utc("2021-06-21T12:00:00Z");
            ++moved;
        }
    }
    ACC_CHECK(c, moved == 150);
    manifest.digest = dataset_digest(manifest.records);

    const VerificationReport skewed = run_all(doc, manifest, builtin_catalog());
    ACC_CHECK(c, skewed.outcomes[0].verdict == Verdict::Fail);
    ACC_CHECK(c, std::fabs(skewed.outcomes[0].metrics.at("max_deviation") - 0.15) < 1e-9);

    ACC_CHECK(c, elapsed_ms(start) < 5000);
}

TEST_CASE("criterion 2: solar oracle agreement") {
    Criterion c{2, "solar elevation vs independent oracle"};

    struct Point {
        double lat, lon;
        const char* time;
        double elevation;
    };
    static const Point kOracle[] = {
        {90.0, 0.0, "2000-12-21T12:00:00Z", -23.4384},
        {0.0, 0.0, "2000-03-20T12:00:00Z", 88.1510},
        {48.85, 2.35, "2021-06-21T12:00:00Z", 64.5434},
        {48.85, 2.35, "2021-12-21T12:00:00Z", 17.6689},
        {48.85, 2.35, "2021-06-21T04:00:00Z", 0.8684},
        {-33.87, 151.21, "2021-01-15T02:00:00Z", 77.1964},
        {-33.87, 151.21, "2021-07-02T02:00:00Z", 33.1022},
        {-33.87, 151.21, "2019-10-10T20:00:00Z", 7.4578},
        {35.68, 139.69, "2005-04-01T03:00:00Z", 58.6778},
        {35.68, 139.69, "2005-11-15T03:00:00Z", 35.2324},
        {64.13, -21.9, "2010-06-21T13:00:00Z", 49.0207},
        {64.13, -21.9, "2010-12-21T13:00:00Z", 2.2889},
        {-77.85, 166.67, "2015-12-25T01:00:00Z", 35.5466},
        {-77.85, 166.67, "2015-06-25T01:00:00Z", -11.2480},
        {19.43, -99.13, "1999-08-07T19:00:00Z", 84.8015},
        {55.75, 37.62, "2030-02-14T09:00:00Z", 20.6934},
        {-1.29, 36.82, "2042-09-23T09:00:00Z", 83.6317},
        {40.71, -74.01, "1950-05-05T17:00:00Z", 65.4698},
        {40.71, -74.01, "2090-05-05T17:00:00Z", 65.7746},
        {-54.8, -68.3, "2022-04-18T16:00:00Z", 23.8670},
    };
    double max_error = 0;
    for (const Point& point : kOracle) {
        const double got =
            solar_elevation({point.lat, point.lon}, parse_utc(point.time)->instant);
        max_error = std::max(max_error, std::fabs(got - point.elevation));
    }
    ACC_CHECK(c, max_error <= 0.5);

    const double pole = solar_elevation({90.0, 0.0}, parse_utc("2000-12-21T12:00:00Z")->instant);
    ACC_CHECK(c, std::fabs(pole - (-23.4)) <= 0.5);
}

TEST_CASE("criterion 3: Bernstein sample sizing") {
    Criterion c{3, "Bernstein sizing closed form, brute force, monotonicity"};

    ACC_CHECK(c, required_sample_size(0.1, 0.05, 0, 1) == 123);

    const auto brute_force = [](double epsilon, double delta, double sigma_hat, double range) {
        const double log_term = std::log(3.0 / delta);
        for (std::uint64_t n = 1;; ++n) {
            const double radius =
                sigma_hat * std::sqrt(2.0 * log_term / static_cast<double>(n)) +
                3.0 * range * log_term / static_cast<double>(n);
            if (radius <= epsilon) return n;
        }
    };
    ACC_CHECK(c, required_sample_size(0.05, 0.05, 0.5, 1) == brute_force(0.05, 0.05, 0.5, 1));
    ACC_CHECK(c, required_sample_size(0.05, 0.05, 0.5, 1) == 1263);

    Rng rng{303};
    bool monotone = true;
    for (int i = 0; i < 1000; ++i) {
        const double epsilon = rng.uniform(0.02, 2.0);
        const double delta = rng.uniform(0.005, 0.5);
        const double sigma_hat = rng.uniform(0.0, 2.0);
        const double range = rng.uniform(0.1, 3.0);
        const std::uint64_t base = required_sample_size(epsilon, delta, sigma_hat, range);
        monotone &= required_sample_size(epsilon * 1.5, delta, sigma_hat, range) <= base;
        monotone &= required_sample_size(epsilon, delta * 0.5, sigma_hat, range) >= base;
        monotone &= required_sample_size(epsilon, delta, sigma_hat + 0.5, range) >= base;
        monotone &= required_sample_size(epsilon, delta, sigma_hat, range * 1.5) >= base;
    }
    ACC_CHECK(c, monotone);
}

TEST_CASE("criterion 4: chi-square kernel and homogeneity fixture") {
    Criterion c{4, "chi-square p-values and two-session fixture"};

    ACC_CHECK(c, std::fabs(chi_square_pvalue(3.841, 1) - 0.05) < 1e-3);
    ACC_CHECK(c, std::fabs(chi_square_pvalue(5.991, 2) - 0.05) < 1e-3);

    bool decreasing = true;
    for (unsigned dof : {1u, 2u, 5u, 10u}) {
        double previous = 2.0;
        for (double x = 0.5 * dof + 0.2; x < 60; x += 0.5) {
            const double p = chi_square_pvalue(x, dof);
            decreasing &= p < previous;
            previous = p;
        }
    }
    ACC_CHECK(c, decreasing);

    // Two sessions with opposed 90/10 label splits: expected counts 50 per
    // cell, Pearson statistic 4 * 40^2 / 50 = 128.
    std::vector<DatasetRecord> records;
    for (int i = 0; i < 100; ++i) {
        records.push_back(test::make_record("a" + std::to_string(i), Split::Train, "sessionA",
                                            i < 90 ? "red" : "green", {0, 0},
                                            "2021-06-01T00:00:00Z"));
        records.push_back(test::make_record("b" + std::to_string(i), Split::Train, "sessionB",
                                            i < 10 ? "red" : "green", {0, 0},
                                            "2021-06-01T00:00:00Z"));
    }
    const DrsDocument doc = parse_drs(R"({"drs_version": "1.0"})");
    const CheckOutcome outcome = check_session_homogeneity(
        test::make_manifest(std::move(records)), {"label", 0.05, "group"}, doc);
    ACC_CHECK(c, std::fabs(outcome.metrics.at("statistic") - 128.0) <= 1e-9);
    ACC_CHECK(c, outcome.verdict == Verdict::Fail);
}

TEST_CASE("criterion 5: split-integrity leak detection") {
    Criterion c{5, "leak injection reports exactly the leaking groups"};

    for (std::size_t k : {std::size_t{0}, std::size_t{1}, std::size_t{5}}) {
        FixtureParams params;
        params.n_records = 200;
        params.n_groups = 20;
        params.class_fractions = {{"red", 0.5}, {"green", 0.5}};
        if (k > 0) params.injected_violations = {"leak_groups:" + std::to_string(k)};
        const DatasetManifest manifest = generate_fixture(500 + k, params);

        // Independent transcription: a group leaks iff it spans >1 split.
        std::map<std::string, std::set<Split>> splits_by_group;
        for (const DatasetRecord& r : manifest.records) {
            splits_by_group[r.group].insert(r.split);
        }
        std::set<std::string> expected;
        for (const auto& [group, splits] : splits_by_group) {
            if (splits.size() > 1) expected.insert(group);
        }
        ACC_CHECK(c, expected.size() == k);

        const CheckOutcome outcome = check_split_integrity(manifest);
        ACC_CHECK(c, outcome.verdict == (k == 0 ? Verdict::Pass : Verdict::Fail));
        ACC_CHECK(c, outcome.metrics.at("leaking_groups") == static_cast<double>(k));
        for (const std::string& group : expected) {
            const bool reported =
                std::any_of(outcome.diagnostics.begin(), outcome.diagnostics.end(),
                            [&](const std::string& d) {
                                return d.find(group) != std::string::npos;
                            });
            ACC_CHECK(c, reported);
        }
    }
}

TEST_CASE("criterion 6: determinism and record-order invariance") {
    Criterion c{6, "shuffle invariance and byte-identical reruns"};

    const DrsDocument doc = parse_drs(kFullDrs);
    DatasetManifest manifest = sun_fixture(606);
    const VerificationReport before = run_all(doc, manifest, builtin_catalog());
    const Digest digest_before = manifest.digest;

    Rng rng{66};
    for (std::size_t i = manifest.records.size(); i > 1; --i) {
        std::swap(manifest.records[i - 1], manifest.records[rng.below(i)]);
    }
    manifest.digest = dataset_digest(manifest.records);
    ACC_CHECK(c, manifest.digest == digest_before);

    const VerificationReport after = run_all(doc, manifest, builtin_catalog());
    ACC_CHECK(c, render_report(before, traceability_matrix(doc, before), ReportFormat::Json) ==
                     render_report(after, traceability_matrix(doc, after), ReportFormat::Json));

    // The CLI must reproduce the same bytes on a rerun.
    const auto dir = work_dir();
    const auto drs_path = (dir / "full.json").string();
    const auto manifest_path = (dir / "manifest.jsonl").string();
    write_file(drs_path, kFullDrs);
    write_file(manifest_path, render_manifest(manifest));
    const std::string command = std::string(DCERT_BIN) + " verify --drs " + drs_path +
                                " --manifest " + manifest_path + " --allow-pending";
    const auto first = run_command(command);
    const auto second = run_command(command);
    ACC_CHECK(c, first.exit_code == 0);
    ACC_CHECK(c, !first.output.empty());
    ACC_CHECK(c, first.output == second.output);
}

TEST_CASE("criterion 7: end-to-end workflow across all check kinds") {
    Criterion c{7, "seven-check workflow with attestation"};
    const auto start = Clock::now();

    const DrsDocument doc = parse_drs(kFullDrs);
    const DatasetManifest manifest = sun_fixture(707);
    const VerificationReport report = run_all(doc, manifest, builtin_catalog());
    ACC_CHECK(c, report.outcomes.size() == 7);
    ACC_CHECK(c, report.summary.passed == 6);
    ACC_CHECK(c, report.summary.pending == 1);

    const auto matrix = traceability_matrix(doc, report);
    ACC_CHECK(c, matrix.size() == 7);
    const DdsCatalog& catalog = builtin_catalog();
    for (const auto& row : matrix) {
        for (const std::string& ref : row.dds_refs) ACC_CHECK(c, catalog.contains(ref));
    }

    const auto dir = work_dir();
    const auto drs_path = (dir / "workflow.json").string();
    const auto manifest_path = (dir / "workflow.jsonl").string();
    const auto attestation_path = (dir / "workflow_attestations.json").string();
    write_file(drs_path, kFullDrs);
    write_file(manifest_path, render_manifest(manifest));
    write_file(attestation_path, R"json([
      {"requirement_id": "REQ-107",
       "inspector": {"name": "A. Dubois", "role": "machine_learning_expert"},
       "verdict": "pass", "evidence": "reviewed 50 sampled annotations",
       "timestamp": "2021-07-01T09:00:00Z"}
    ])json");

    const std::string base = std::string(DCERT_BIN) + " verify --drs " + drs_path +
                             " --manifest " + manifest_path + " --out /dev/null";
    ACC_CHECK(c, run_command(base).exit_code == 3);
    ACC_CHECK(c, run_command(base + " --attestations " + attestation_path).exit_code == 0);

    ACC_CHECK(c, elapsed_ms(start) < 10000);
}
