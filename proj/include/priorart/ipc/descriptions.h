#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "priorart/corpus/ipc_code.h"

namespace priorart::ipc {

using corpus::IpcCode;

struct Description {
  IpcCode code;
  std::string text;
};

// Code -> official description text. Keys are canonical code strings.
class DescriptionSet {
 public:
  // Rejects invalid codes, duplicate codes and descriptions that normalize
  // to nothing. Throws DataError.
  void add(const IpcCode& code, std::string text);

  const std::string* find(const IpcCode& code) const noexcept;
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::map<IpcCode, std::string>& entries() const noexcept { return entries_; }

 private:
  std::map<IpcCode, std::string> entries_;
};

// Table file: one `code<TAB>description` record per line. Blank lines and
// lines starting with '#' are ignored.
DescriptionSet load_descriptions(std::istream& in);
DescriptionSet load_descriptions(const std::filesystem::path& path);

enum class SubgroupExpansion {
  siblings,     // every subgroup in the table under each listed code's group
  listed_only,  // only the listed codes and their ancestors
};

SubgroupExpansion parse_expansion(std::string_view name);  // "siblings" | "listed-only"

struct AggregateOptions {
  SubgroupExpansion expansion = SubgroupExpansion::siblings;
  // Include the enclosing subclass and group entries of every listed code.
  bool include_ancestors = true;
};

struct Aggregate {
  std::vector<Description> descriptions;  // sorted by code, one per code
  std::vector<IpcCode> missing;           // listed codes with no table entry
};

// Union of the descriptions attached to `codes`. Descriptions whose text is
// identical to an earlier one (in code order) are dropped.
// Throws std::invalid_argument when `codes` is empty.
Aggregate aggregate(const DescriptionSet& table, std::span<const IpcCode> codes, const AggregateOptions& options = {});

}  // namespace priorart::ipc
