#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dcert/manifest.hpp"

namespace dcert {

/// Synthetic manifest generation for testing the verification pipeline.
/// Violations are injected on top of an otherwise clean dataset:
///   "leak_groups:<k>"     k groups get records in both train and test
///   "class_skew:<factor>" first class over-represented by that factor
///   "missing_field:<name>:<k>"  k records drop the named meta field
///   "bad_value:<name>:<k>"      k records get value "<name>-INVALID"
struct FixtureParams {
    std::size_t n_records = 0;
    std::size_t n_groups = 1;
    // train, validation, test; sums to 1.
    std::array<double, 3> split_fractions{0.6, 0.2, 0.2};
    // label -> proportion; sums to 1.
    std::map<std::string, double> class_fractions;
    double lat_min = 43.0, lat_max = 49.0;
    double lon_min = -1.0, lon_max = 7.0;
    std::string time_min = "2021-01-01T00:00:00Z";
    std::string time_max = "2021-12-31T23:59:59Z";
    std::vector<std::string> injected_violations;
};

/// Deterministic in (seed, params): same inputs, byte-identical manifest.
/// Throws std::invalid_argument on infeasible params.
DatasetManifest generate_fixture(std::uint64_t seed, const FixtureParams& params);

}  // namespace dcert
