#include "dcert/dds.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <json.hpp>

#include "dcert/builtin_catalog.hpp"
#include "dcert/diagnostics.hpp"

namespace dcert {
namespace {

using nlohmann::json;

DdsKind parse_kind(const std::string& name, const std::string& path) {
    if (name == "definition") return DdsKind::Definition;
    if (name == "objective") return DdsKind::Objective;
    if (name == "recommendation") return DdsKind::Recommendation;
    throw ParseError("unknown DDS entry kind \"" + name + "\"", path);
}

}  // namespace

DdsCatalog::DdsCatalog(std::vector<DdsEntry> entries) : entries_(std::move(entries)) {}

const DdsEntry* DdsCatalog::find(const std::string& id) const {
    auto it = std::find_if(entries_.begin(), entries_.end(),
                           [&](const DdsEntry& e) { return e.id == id; });
    return it == entries_.end() ? nullptr : &*it;
}

bool valid_dds_id(const std::string& id) {
    // (DEF|OBJ|REC)-<digits>(.<digits>|-<digits>)?
    static const std::set<std::string> prefixes{"DEF", "OBJ", "REC"};
    if (id.size() < 5 || id[3] != '-') return false;
    if (!prefixes.count(id.substr(0, 3))) return false;
    std::size_t i = 4;
    std::size_t digits = 0;
    while (i < id.size() && std::isdigit(static_cast<unsigned char>(id[i]))) ++i, ++digits;
    if (digits == 0) return false;
    if (i == id.size()) return true;
    if (id[i] != '.' && id[i] != '-') return false;
    ++i;
    digits = 0;
    while (i < id.size() && std::isdigit(static_cast<unsigned char>(id[i]))) ++i, ++digits;
    return digits > 0 && i == id.size();
}

DdsCatalog parse_catalog(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("catalog: ") + e.what(), "");
    }
    if (!root.is_array()) throw ParseError("catalog root must be a JSON array", "");

    std::vector<DdsEntry> entries;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < root.size(); ++i) {
        const std::string path = "/" + std::to_string(i);
        const json& item = root[i];
        if (!item.is_object()) throw ParseError("catalog entry must be an object", path);
        for (const auto& [key, _] : item.items()) {
            if (key != "id" && key != "kind" && key != "text") {
                throw ParseError("unknown key \"" + key + "\"", path);
            }
        }
        DdsEntry entry;
        entry.id = item.value("id", "");
        if (!valid_dds_id(entry.id)) {
            throw ParseError("invalid DDS id \"" + entry.id + "\"", path + "/id");
        }
        if (!seen.insert(entry.id).second) {
            throw ParseError("duplicate DDS id \"" + entry.id + "\"", path + "/id");
        }
        entry.kind = parse_kind(item.value("kind", ""), path + "/kind");
        entry.text = item.value("text", "");
        entries.push_back(std::move(entry));
    }
    return DdsCatalog(std::move(entries));
}

const DdsCatalog& builtin_catalog() {
    static const DdsCatalog catalog = parse_catalog(detail::kBuiltinCatalogJson);
    return catalog;
}

}  // namespace dcert
