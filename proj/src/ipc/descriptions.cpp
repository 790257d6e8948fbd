#include "priorart/ipc/descriptions.h"

#include <fstream>
#include <set>
#include <stdexcept>

#include "priorart/corpus/normalize.h"
#include "priorart/error.h"

namespace priorart::ipc {

void DescriptionSet::add(const IpcCode& code, std::string text) {
  if (corpus::normalize_tokens(text, false).empty()) {
    throw DataError("IPC description for " + code.str() + " is empty");
  }
  if (!entries_.emplace(code, std::move(text)).second) {
    throw DataError("duplicate IPC description for " + code.str());
  }
}

const std::string* DescriptionSet::find(const IpcCode& code) const noexcept {
  const auto it = entries_.find(code);
  return it == entries_.end() ? nullptr : &it->second;
}

DescriptionSet load_descriptions(std::istream& in) {
  DescriptionSet table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError("IPC table line " + std::to_string(line_no) + ": expected code<TAB>description");
    }
    try {
      table.add(IpcCode::parse(line.substr(0, tab)), line.substr(tab + 1));
    } catch (const DataError& e) {
      throw DataError("IPC table line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return table;
}

DescriptionSet load_descriptions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open IPC table " + path.string());
  return load_descriptions(in);
}

SubgroupExpansion parse_expansion(std::string_view name) {
  if (name == "siblings") return SubgroupExpansion::siblings;
  if (name == "listed-only") return SubgroupExpansion::listed_only;
  throw ConfigError("unknown subgroup expansion '" + std::string(name) + "' (expected siblings|listed-only)");
}

Aggregate aggregate(const DescriptionSet& table, std::span<const IpcCode> codes, const AggregateOptions& options) {
  if (codes.empty()) throw std::invalid_argument("aggregate: no IPC codes given");

  std::set<IpcCode> wanted;
  std::set<IpcCode> missing;
  for (const auto& code : codes) {
    if (!table.find(code)) missing.insert(code);
    wanted.insert(code);
    if (options.include_ancestors) {
      wanted.insert(code.subclass_code());
      if (code.level() == IpcCode::Level::subgroup) wanted.insert(code.group_code());
    }
    if (options.expansion == SubgroupExpansion::siblings) {
      // Subclass codes expand to everything beneath them; group and subgroup
      // codes expand to the subgroups of their group.
      const IpcCode scope = code.level() == IpcCode::Level::subclass ? code : code.group_code();
      for (const auto& [entry, text] : table.entries()) {
        if (scope.covers(entry)) wanted.insert(entry);
      }
    }
  }

  Aggregate out;
  std::set<std::string> seen_text;
  for (const auto& code : wanted) {
    const auto* text = table.find(code);
    if (!text || !seen_text.insert(*text).second) continue;
    out.descriptions.push_back({code, *text});
  }
  out.missing.assign(missing.begin(), missing.end());
  return out;
}

}  // namespace priorart::ipc
