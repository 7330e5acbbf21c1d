#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "dcert/checks.hpp"
#include "dcert/dds.hpp"
#include "dcert/diagnostics.hpp"
#include "dcert/drs.hpp"
#include "dcert/fixture.hpp"
#include "dcert/manifest.hpp"
#include "dcert/report.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

dcert::DdsCatalog load_catalog(const std::string& path) {
    if (path.empty()) return dcert::builtin_catalog();
    return dcert::parse_catalog(read_file(path));
}

int run_validate(const std::string& drs_path, const std::string& catalog_path) {
    const dcert::DdsCatalog catalog = load_catalog(catalog_path);
    const dcert::DrsDocument doc = dcert::parse_drs(read_file(drs_path));
    const auto diagnostics = dcert::validate_drs(doc, catalog);

    std::size_t errors = 0;
    for (const auto& diag : diagnostics) {
        if (diag.severity == dcert::Severity::Error) ++errors;
        std::cout << dcert::severity_name(diag.severity) << " " << diag.path << ": "
                  << diag.message << "\n";
    }
    std::cout << errors << " errors, " << diagnostics.size() - errors << " warnings\n";
    return errors > 0 ? 1 : 0;
}

int run_verify(const std::string& drs_path, const std::string& manifest_path,
               const std::string& catalog_path, const std::string& attestations_path,
               const std::string& out_path, const std::string& format, bool allow_pending) {
    const dcert::DdsCatalog catalog = load_catalog(catalog_path);
    const dcert::DrsDocument doc = dcert::parse_drs(read_file(drs_path));

    const auto diagnostics = dcert::validate_drs(doc, catalog);
    bool invalid = false;
    for (const auto& diag : diagnostics) {
        if (diag.severity == dcert::Severity::Error) invalid = true;
        std::cerr << dcert::severity_name(diag.severity) << " " << diag.path << ": "
                  << diag.message << "\n";
    }
    if (invalid) {
        std::cerr << "DRS invalid; verification aborted\n";
        return 2;
    }

    const dcert::DatasetManifest manifest =
        dcert::load_manifest(read_file(manifest_path), manifest_path);
    dcert::VerificationReport report = dcert::run_all(doc, manifest, catalog);

    if (!attestations_path.empty()) {
        const auto attestations = dcert::parse_attestations(read_file(attestations_path));
        report = dcert::merge_attestations(std::move(report), attestations, doc);
    }

    const auto matrix = dcert::traceability_matrix(doc, report);
    const auto rendered = dcert::render_report(
        report, matrix,
        format == "text" ? dcert::ReportFormat::Text : dcert::ReportFormat::Json);
    write_output(out_path, rendered);
    return dcert::exit_code(report, allow_pending);
}

dcert::FixtureParams parse_fixture_flags(std::size_t records, std::size_t groups,
                                         const std::string& classes,
                                         const std::vector<std::string>& violations) {
    dcert::FixtureParams params;
    params.n_records = records;
    params.n_groups = groups;
    params.injected_violations = violations;

    std::istringstream in(classes);
    std::string part;
    while (std::getline(in, part, ',')) {
        auto colon = part.rfind(':');
        if (colon == std::string::npos) {
            throw std::runtime_error("class spec must be label:fraction");
        }
        params.class_fractions[part.substr(0, colon)] = std::stod(part.substr(colon + 1));
    }
    return params;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dcert - dataset requirement verification"};
    app.require_subcommand(1);

    std::string drs_path, manifest_path, catalog_path, attestations_path, out_path;
    std::string format = "json";
    bool allow_pending = false;

    CLI::App* validate = app.add_subcommand("validate", "Parse and validate a DRS document");
    validate->add_option("--drs", drs_path, "DRS document path")->required();
    validate->add_option("--catalog", catalog_path, "DDS catalog path (default: built-in)");

    CLI::App* verify = app.add_subcommand("verify", "Run the verification plan on a manifest");
    verify->add_option("--drs", drs_path, "DRS document path")->required();
    verify->add_option("--manifest", manifest_path, "Dataset manifest (JSON Lines)")->required();
    verify->add_option("--catalog", catalog_path, "DDS catalog path (default: built-in)");
    verify->add_option("--attestations", attestations_path, "Manual attestation file");
    verify->add_option("--out", out_path, "Report output path (default: stdout)");
    verify->add_option("--format", format, "Report format")
        ->check(CLI::IsMember({"json", "text"}));
    verify->add_flag("--allow-pending", allow_pending,
                     "Exit 0 even when manual checks are pending");

    std::size_t fixture_records = 100, fixture_groups = 10;
    std::uint64_t fixture_seed = 1;
    std::string fixture_classes = "red:0.5,green:0.5";
    std::vector<std::string> fixture_violations;
    CLI::App* fixture = app.add_subcommand("fixture", "Generate a synthetic test manifest");
    fixture->group("");  // hidden; for testing
    fixture->add_option("--seed", fixture_seed, "RNG seed");
    fixture->add_option("--records", fixture_records, "Record count");
    fixture->add_option("--groups", fixture_groups, "Acquisition group count");
    fixture->add_option("--classes", fixture_classes, "label:fraction list");
    fixture->add_option("--violation", fixture_violations, "Violation to inject (repeatable)");
    fixture->add_option("--out", out_path, "Manifest output path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (validate->parsed()) return run_validate(drs_path, catalog_path);
        if (verify->parsed()) {
            return run_verify(drs_path, manifest_path, catalog_path, attestations_path, out_path,
                              format, allow_pending);
        }
        const auto params = parse_fixture_flags(fixture_records, fixture_groups, fixture_classes,
                                                fixture_violations);
        const auto manifest = dcert::generate_fixture(fixture_seed, params);
        write_output(out_path, dcert::render_manifest(manifest));
        return 0;
    } catch (const dcert::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
