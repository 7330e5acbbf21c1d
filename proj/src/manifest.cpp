#include "dcert/manifest.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "dcert/diagnostics.hpp"

namespace dcert {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

MetaValue parse_meta_value(const json& value, const std::string& context, int line) {
    if (value.is_number()) return value.get<double>();
    if (value.is_string()) {
        const std::string text = value.get<std::string>();
        if (auto utc = parse_utc(text)) return *utc;
        return text;
    }
    if (value.is_object() && value.contains("lat") && value.contains("lon")) {
        if (value.size() != 2 || !value["lat"].is_number() || !value["lon"].is_number()) {
            throw ParseError("malformed geopoint in " + context, "", line);
        }
        GeoPoint point{value["lat"].get<double>(), value["lon"].get<double>()};
        if (point.lat < -90 || point.lat > 90 || point.lon < -180 || point.lon > 180) {
            throw ParseError("geopoint out of range in " + context, "", line);
        }
        return point;
    }
    throw ParseError("unsupported metadata value in " + context, "", line);
}

json meta_value_to_json(const MetaValue& value) {
    if (const auto* s = std::get_if<std::string>(&value)) return *s;
    if (const auto* n = std::get_if<double>(&value)) return *n;
    if (const auto* t = std::get_if<UtcTime>(&value)) return t->text;
    const auto& p = std::get<GeoPoint>(value);
    ordered_json out;
    out["lat"] = p.lat;
    out["lon"] = p.lon;
    return out;
}

}  // namespace

const char* split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Validation: return "validation";
        case Split::Test: return "test";
    }
    return "?";
}

std::optional<Split> parse_split(const std::string& name) {
    if (name == "train") return Split::Train;
    if (name == "validation") return Split::Validation;
    if (name == "test") return Split::Test;
    return std::nullopt;
}

std::optional<UtcTime> parse_utc(const std::string& text) {
    // Strict "YYYY-MM-DDThh:mm:ssZ".
    if (text.size() != 20 || text[4] != '-' || text[7] != '-' || text[10] != 'T' ||
        text[13] != ':' || text[16] != ':' || text[19] != 'Z') {
        return std::nullopt;
    }
    int y, mo, d, h, mi, s;
    if (std::sscanf(text.c_str(), "%4d-%2d-%2dT%2d:%2d:%2dZ", &y, &mo, &d, &h, &mi, &s) != 6) {
        return std::nullopt;
    }
    using namespace std::chrono;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 59) {
        return std::nullopt;
    }
    sys_seconds instant = sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
    return UtcTime{instant, text};
}

UtcTime make_utc(std::chrono::sys_seconds instant) {
    using namespace std::chrono;
    const sys_days day = floor<days>(instant);
    const year_month_day ymd{day};
    const hh_mm_ss hms{instant - day};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ",
                  static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()),
                  static_cast<long long>(hms.hours().count()),
                  static_cast<long long>(hms.minutes().count()),
                  static_cast<long long>(hms.seconds().count()));
    return UtcTime{instant, buf};
}

std::string hex(const Digest& digest) {
    static const char* alphabet = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (std::uint8_t byte : digest) {
        out.push_back(alphabet[byte >> 4]);
        out.push_back(alphabet[byte & 0xf]);
    }
    return out;
}

std::string render_record(const DatasetRecord& record) {
    ordered_json out;
    out["id"] = record.id;
    out["split"] = split_name(record.split);
    out["group"] = record.group;
    out["label"] = record.label;
    json meta;  // std::map-backed: keys come out sorted
    for (const auto& [name, value] : record.meta) meta[name] = meta_value_to_json(value);
    out["meta"] = std::move(meta);
    return out.dump();
}

std::string render_manifest(const DatasetManifest& manifest) {
    std::string out;
    for (const DatasetRecord& record : manifest.records) {
        out += render_record(record);
        out += '\n';
    }
    return out;
}

Digest dataset_digest(const std::vector<DatasetRecord>& records) {
    std::vector<const DatasetRecord*> sorted;
    sorted.reserve(records.size());
    for (const DatasetRecord& r : records) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(),
              [](const DatasetRecord* a, const DatasetRecord* b) { return a->id < b->id; });

    std::string canonical;
    for (const DatasetRecord* r : sorted) {
        canonical += render_record(*r);
        canonical += '\n';
    }

    Digest digest{};
    unsigned len = 0;
    EVP_Digest(canonical.data(), canonical.size(), digest.data(), &len, EVP_sha256(), nullptr);
    return digest;
}

DatasetManifest load_manifest(const std::string& text, const std::string& source_uri) {
    DatasetManifest manifest;
    manifest.source_uri = source_uri;

    std::map<std::string, int> seen;  // id -> line
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

        json item;
        try {
            item = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError("malformed manifest line: " + std::string(e.what()), "", line_no);
        }
        if (!item.is_object()) throw ParseError("manifest line must be an object", "", line_no);
        for (const auto& [key, _] : item.items()) {
            if (key != "id" && key != "split" && key != "group" && key != "label" &&
                key != "meta") {
                throw ParseError("unknown key \"" + key + "\"", "", line_no);
            }
        }

        DatasetRecord record;
        if (!item.contains("id") || !item["id"].is_string() ||
            item["id"].get<std::string>().empty()) {
            throw ParseError("record id missing or empty", "", line_no);
        }
        record.id = item["id"].get<std::string>();

        auto [it, inserted] = seen.emplace(record.id, line_no);
        if (!inserted) {
            throw ParseError("duplicate record id \"" + record.id + "\" (first at line " +
                                 std::to_string(it->second) + ")",
                             "", line_no);
        }

        if (!item.contains("split") || !item["split"].is_string()) {
            throw ParseError("record split missing", "", line_no);
        }
        const std::string split_text = item["split"].get<std::string>();
        auto split = parse_split(split_text);
        if (!split) {
            throw ParseError("unknown split \"" + split_text +
                                 "\" (expected train, validation, or test)",
                             "", line_no);
        }
        record.split = *split;

        record.group = item.value("group", "");
        record.label = item.value("label", "");

        if (item.contains("meta")) {
            const json& meta = item["meta"];
            if (!meta.is_object()) throw ParseError("\"meta\" must be an object", "", line_no);
            for (const auto& [name, value] : meta.items()) {
                record.meta[name] =
                    parse_meta_value(value, "field \"" + name + "\"", line_no);
            }
        }
        manifest.records.push_back(std::move(record));
    }

    if (manifest.records.empty()) throw ParseError("empty manifest", "");
    manifest.digest = dataset_digest(manifest.records);
    return manifest;
}

}  // namespace dcert
