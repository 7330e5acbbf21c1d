#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "dcert/manifest.hpp"

namespace dcert::test {

// splitmix64, independent of the fixture generator's seeding.
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

inline DatasetRecord make_record(std::string id, Split split, std::string group,
                                 std::string label, GeoPoint gps, const std::string& time) {
    DatasetRecord record;
    record.id = std::move(id);
    record.split = split;
    record.group = std::move(group);
    record.label = std::move(label);
    record.meta["gps"] = gps;
    record.meta["time"] = *parse_utc(time);
    record.meta["camera_model"] = std::string("CAM-A");
    return record;
}

inline DatasetManifest make_manifest(std::vector<DatasetRecord> records) {
    DatasetManifest manifest;
    manifest.records = std::move(records);
    manifest.digest = dataset_digest(manifest.records);
    return manifest;
}

struct CommandResult {
    int exit_code = -1;
    std::string output;  // stdout only
};

inline CommandResult run_command(const std::string& command) {
    CommandResult result;
    FILE* pipe = popen(command.c_str(), "r");
    if (!pipe) return result;
    char buffer[4096];
    std::size_t n;
    while ((n = fread(buffer, 1, sizeof buffer, pipe)) > 0) {
        result.output.append(buffer, n);
    }
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content;
}

}  // namespace dcert::test
