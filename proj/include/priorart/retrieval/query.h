#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "priorart/corpus/document.h"
#include "priorart/graph/phrase_graph.h"

namespace priorart::retrieval {

enum class MatchMode { exact_phrase, all_tokens };
enum class Provenance { deterministic, human_edited };

std::string_view to_string(MatchMode mode) noexcept;
std::string_view to_string(Provenance p) noexcept;
MatchMode parse_match_mode(std::string_view name);  // ConfigError on anything else
Provenance parse_provenance(std::string_view name);

struct StructuredQuery {
  std::vector<std::string> phrases;  // rank order
  std::size_t k = 0;
  std::vector<corpus::Section> sections{corpus::kAllSections.begin(), corpus::kAllSections.end()};
  MatchMode match_mode = MatchMode::exact_phrase;
  std::size_t min_phrase_matches = 1;
  Provenance provenance = Provenance::deterministic;
  std::string editor_note;

  friend bool operator==(const StructuredQuery&, const StructuredQuery&) = default;
};

// Throws std::invalid_argument when the phrase list is empty or has
// duplicates, no section is targeted or min_phrase_matches is 0.
void validate(const StructuredQuery& query);

struct KBounds {
  std::size_t min = 12;
  std::size_t max = 16;
  bool override_bounds = false;  // accept any k >= 1
};

// Top-k phrases in rank order. Throws std::invalid_argument when k is outside
// the bounds (unless overridden), zero, or larger than the phrase list.
StructuredQuery formulate_query(std::span<const graph::RankedPhrase> ranked, std::size_t k,
                                std::vector<corpus::Section> sections, MatchMode mode, const KBounds& bounds = {});

// Search string for display and logs, e.g.
// ("rotary transformer" OR "ferrite core") IN (title, abstract).
std::string render(const StructuredQuery& query);

nlohmann::json to_json(const StructuredQuery& query);
// Throws DataError on missing or malformed fields.
StructuredQuery query_from_json(const nlohmann::json& j);

}  // namespace priorart::retrieval
