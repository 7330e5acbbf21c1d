#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace dcert {

enum class Split { Train, Validation, Test };

const char* split_name(Split s);
std::optional<Split> parse_split(const std::string& name);

struct GeoPoint {
    double lat = 0;  // degrees, [-90, 90]
    double lon = 0;  // degrees, [-180, 180]
    bool operator==(const GeoPoint&) const = default;
};

/// UTC timestamp at second precision. Keeps the original text so rendering
/// and digests are exact.
struct UtcTime {
    std::chrono::sys_seconds instant{};
    std::string text;  // "YYYY-MM-DDThh:mm:ssZ"
    bool operator==(const UtcTime&) const = default;
};

/// Strict parse of "YYYY-MM-DDThh:mm:ssZ". Rejects local times and offsets.
std::optional<UtcTime> parse_utc(const std::string& text);

UtcTime make_utc(std::chrono::sys_seconds instant);

using MetaValue = std::variant<std::string, double, UtcTime, GeoPoint>;

struct DatasetRecord {
    std::string id;
    Split split = Split::Train;
    std::string group;  // acquisition sequence / session id
    std::string label;  // class
    std::map<std::string, MetaValue> meta;
};

using Digest = std::array<std::uint8_t, 32>;

std::string hex(const Digest& digest);

/// Immutable record collection plus content digest.
struct DatasetManifest {
    std::vector<DatasetRecord> records;
    Digest digest{};
    std::string source_uri;
};

/// Loads a JSON Lines manifest (one record object per line). Throws ParseError
/// with the line number on malformed lines, duplicate ids, unknown split
/// values, or an empty manifest.
DatasetManifest load_manifest(const std::string& text, const std::string& source_uri = "");

/// SHA-256 over the canonical record stream (records sorted by id, fields in
/// fixed order). Invariant under input file order.
Digest dataset_digest(const std::vector<DatasetRecord>& records);

/// One record as a canonical JSON line (the digest input unit, also used to
/// write manifests back out).
std::string render_record(const DatasetRecord& record);

std::string render_manifest(const DatasetManifest& manifest);

}  // namespace dcert
