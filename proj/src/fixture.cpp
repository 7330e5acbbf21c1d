#include "dcert/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dcert/diagnostics.hpp"

namespace dcert {
namespace {

// splitmix64; fixed algorithm so fixtures are identical across platforms.
struct Rng {
    std::uint64_t state;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t below(std::uint64_t n) { return next() % n; }
};

// Largest-remainder apportionment of n items into the given fractions.
std::vector<std::size_t> apportion(std::size_t n, const std::vector<double>& fractions) {
    std::vector<std::size_t> counts(fractions.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        const double exact = fractions[i] * static_cast<double>(n);
        counts[i] = static_cast<std::size_t>(std::floor(exact));
        assigned += counts[i];
        remainders.emplace_back(exact - std::floor(exact), i);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < n; ++i, ++assigned) {
        ++counts[remainders[i % remainders.size()].second];
    }
    return counts;
}

struct Violation {
    std::string kind;
    std::string field;
    std::size_t count = 0;
    double factor = 0;
};

Violation parse_violation(const std::string& text) {
    std::vector<std::string> parts;
    std::istringstream in(text);
    std::string part;
    while (std::getline(in, part, ':')) parts.push_back(part);

    Violation v;
    if (parts.empty()) throw std::invalid_argument("empty violation spec");
    v.kind = parts[0];
    if (v.kind == "leak_groups" && parts.size() == 2) {
        v.count = std::stoul(parts[1]);
        return v;
    }
    if (v.kind == "class_skew" && parts.size() == 2) {
        v.factor = std::stod(parts[1]);
        if (v.factor <= 1.0) throw std::invalid_argument("class_skew factor must exceed 1");
        return v;
    }
    if ((v.kind == "missing_field" || v.kind == "bad_value") && parts.size() == 3) {
        v.field = parts[1];
        v.count = std::stoul(parts[2]);
        return v;
    }
    throw std::invalid_argument("unknown violation spec \"" + text + "\"");
}

}  // namespace

DatasetManifest generate_fixture(std::uint64_t seed, const FixtureParams& params) {
    if (params.n_records == 0) throw std::invalid_argument("n_records must be positive");
    if (params.n_groups == 0 || params.n_groups > params.n_records) {
        throw std::invalid_argument("n_groups must lie in [1, n_records]");
    }
    double split_sum = params.split_fractions[0] + params.split_fractions[1] +
                       params.split_fractions[2];
    if (std::fabs(split_sum - 1.0) > 1e-9) {
        throw std::invalid_argument("split fractions must sum to 1");
    }
    if (params.class_fractions.empty()) {
        throw std::invalid_argument("class fractions must be non-empty");
    }
    double class_sum = 0;
    for (const auto& [_, p] : params.class_fractions) class_sum += p;
    if (std::fabs(class_sum - 1.0) > 1e-9) {
        throw std::invalid_argument("class fractions must sum to 1");
    }
    auto t_min = parse_utc(params.time_min);
    auto t_max = parse_utc(params.time_max);
    if (!t_min || !t_max || t_max->instant < t_min->instant) {
        throw std::invalid_argument("invalid time range");
    }

    std::vector<Violation> violations;
    for (const std::string& text : params.injected_violations) {
        violations.push_back(parse_violation(text));
    }

    Rng rng{seed ^ 0xdc5e7a11d5c3b1e9ULL};

    // Split sizes over records and over groups; every non-empty split gets at
    // least one group.
    const std::vector<double> fractions(params.split_fractions.begin(),
                                        params.split_fractions.end());
    const std::vector<std::size_t> split_counts = apportion(params.n_records, fractions);
    std::vector<std::size_t> group_counts = apportion(params.n_groups, fractions);
    for (std::size_t i = 0; i < 3; ++i) {
        if (split_counts[i] > 0 && group_counts[i] == 0) {
            auto richest = std::max_element(group_counts.begin(), group_counts.end());
            if (*richest < 2) throw std::invalid_argument("not enough groups for the splits");
            --*richest;
            group_counts[i] = 1;
        }
        if (split_counts[i] == 0 && group_counts[i] > 0) {
            group_counts[(i + 1) % 3] += group_counts[i];
            group_counts[i] = 0;
        }
    }

    std::vector<std::vector<std::string>> groups_per_split(3);
    std::size_t group_index = 0;
    for (std::size_t s = 0; s < 3; ++s) {
        for (std::size_t g = 0; g < group_counts[s]; ++g) {
            groups_per_split[s].push_back("grp-" + std::to_string(group_index++));
        }
    }

    // Label sequence with exact class quotas, dealt cyclically so every group
    // sees the same mix.
    std::vector<std::string> labels;
    std::vector<double> class_props;
    for (const auto& [label, p] : params.class_fractions) {
        labels.push_back(label);
        class_props.push_back(p);
    }
    const std::vector<std::size_t> label_counts = apportion(params.n_records, class_props);
    std::vector<std::size_t> label_budget = label_counts;

    DatasetManifest manifest;
    manifest.source_uri = "fixture:seed=" + std::to_string(seed);

    const int id_width = static_cast<int>(std::to_string(params.n_records).size());
    std::size_t record_index = 0;
    for (std::size_t s = 0; s < 3; ++s) {
        for (std::size_t i = 0; i < split_counts[s]; ++i, ++record_index) {
            DatasetRecord record;
            std::ostringstream id;
            id << "img-";
            id.width(id_width);
            id.fill('0');
            id << record_index;
            record.id = id.str();
            record.split = static_cast<Split>(s);
            record.group = groups_per_split[s][i % groups_per_split[s].size()];

            // Next label with remaining budget, scanning cyclically.
            std::size_t li = record_index % labels.size();
            while (label_budget[li] == 0) li = (li + 1) % labels.size();
            --label_budget[li];
            record.label = labels[li];

            GeoPoint gps{rng.uniform(params.lat_min, params.lat_max),
                         rng.uniform(params.lon_min, params.lon_max)};
            record.meta["gps"] = gps;
            const auto span = static_cast<std::uint64_t>(
                (t_max->instant - t_min->instant).count() + 1);
            const auto offset = std::chrono::seconds(static_cast<long long>(rng.below(span)));
            record.meta["time"] = make_utc(t_min->instant + offset);
            record.meta["camera_model"] = std::string("CAM-A");

            manifest.records.push_back(std::move(record));
        }
    }

    for (const Violation& v : violations) {
        if (v.kind == "leak_groups") {
            const auto& train_groups = groups_per_split[0];
            if (v.count > train_groups.size()) {
                throw std::invalid_argument("cannot leak more groups than exist in train");
            }
            // Move one train record of each of the first k train groups to test.
            for (std::size_t g = 0; g < v.count; ++g) {
                const std::string& group = train_groups[g];
                auto it = std::find_if(manifest.records.begin(), manifest.records.end(),
                                       [&](const DatasetRecord& r) {
                                           return r.group == group && r.split == Split::Train;
                                       });
                if (it == manifest.records.end()) {
                    throw std::invalid_argument("group " + group + " has no train records");
                }
                it->split = Split::Test;
            }
        } else if (v.kind == "class_skew") {
            const std::string& target = labels.front();
            const std::size_t want = std::min(
                params.n_records,
                static_cast<std::size_t>(std::llround(v.factor *
                                                      static_cast<double>(label_counts[0]))));
            std::size_t have = label_counts[0];
            for (DatasetRecord& record : manifest.records) {
                if (have >= want) break;
                if (record.label != target) {
                    record.label = target;
                    ++have;
                }
            }
        } else if (v.kind == "missing_field") {
            std::size_t done = 0;
            for (DatasetRecord& record : manifest.records) {
                if (done == v.count) break;
                if (record.meta.erase(v.field) > 0) ++done;
            }
            if (done < v.count) {
                throw std::invalid_argument("fewer records carry field " + v.field +
                                            " than requested");
            }
        } else if (v.kind == "bad_value") {
            std::size_t done = 0;
            for (DatasetRecord& record : manifest.records) {
                if (done == v.count) break;
                auto it = record.meta.find(v.field);
                if (it != record.meta.end()) {
                    it->second = v.field + "-INVALID";
                    ++done;
                }
            }
            if (done < v.count) {
                throw std::invalid_argument("fewer records carry field " + v.field +
                                            " than requested");
            }
        }
    }

    manifest.digest = dataset_digest(manifest.records);
    return manifest;
}

}  // namespace dcert
