#pragma once

#include <optional>
#include <string>
#include <vector>

namespace dcert {

enum class DdsKind { Definition, Objective, Recommendation };

/// One generic recommendation of the Dataset Definition Standard.
struct DdsEntry {
    std::string id;  // e.g. "REC-21-3", "DEF-21.1"
    DdsKind kind = DdsKind::Recommendation;
    std::string text;
};

/// The catalog of DDS entries that requirement trace links resolve against.
class DdsCatalog {
  public:
    explicit DdsCatalog(std::vector<DdsEntry> entries);

    const std::vector<DdsEntry>& entries() const { return entries_; }
    const DdsEntry* find(const std::string& id) const;
    bool contains(const std::string& id) const { return find(id) != nullptr; }

  private:
    std::vector<DdsEntry> entries_;
};

/// True iff `id` matches (DEF|OBJ|REC)-<digits>(.<digits>|-<digits>)?
bool valid_dds_id(const std::string& id);

/// Parses a catalog file: a JSON array of {"id","kind","text"}.
/// Throws ParseError on malformed input, bad id syntax, or duplicate ids.
DdsCatalog parse_catalog(const std::string& text);

/// The catalog shipped with the tool (embedded copy of data/dds_catalog.json).
const DdsCatalog& builtin_catalog();

}  // namespace dcert
