#include "priorart/retrieval/query.h"

#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "priorart/error.h"

namespace priorart::retrieval {

std::string_view to_string(MatchMode mode) noexcept {
  return mode == MatchMode::exact_phrase ? "exact_phrase" : "all_tokens";
}

std::string_view to_string(Provenance p) noexcept {
  return p == Provenance::deterministic ? "deterministic" : "human_edited";
}

MatchMode parse_match_mode(std::string_view name) {
  if (name == "exact_phrase") return MatchMode::exact_phrase;
  if (name == "all_tokens") return MatchMode::all_tokens;
  throw ConfigError("unknown match mode '" + std::string(name) + "' (expected exact_phrase|all_tokens)");
}

Provenance parse_provenance(std::string_view name) {
  if (name == "deterministic") return Provenance::deterministic;
  if (name == "human_edited") return Provenance::human_edited;
  throw DataError("unknown query provenance '" + std::string(name) + "'");
}

void validate(const StructuredQuery& query) {
  if (query.phrases.empty()) throw std::invalid_argument("query has no phrases");
  std::set<std::string> seen;
  for (const auto& p : query.phrases) {
    if (p.empty()) throw std::invalid_argument("query has an empty phrase");
    if (!seen.insert(p).second) throw std::invalid_argument("duplicate query phrase '" + p + "'");
  }
  if (query.sections.empty()) throw std::invalid_argument("query targets no section");
  if (query.min_phrase_matches == 0) throw std::invalid_argument("min_phrase_matches must be at least 1");
}

StructuredQuery formulate_query(std::span<const graph::RankedPhrase> ranked, std::size_t k,
                                std::vector<corpus::Section> sections, MatchMode mode, const KBounds& bounds) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  if (!bounds.override_bounds && (k < bounds.min || k > bounds.max)) {
    throw std::invalid_argument("k = " + std::to_string(k) + " is outside [" + std::to_string(bounds.min) + ", " +
                                std::to_string(bounds.max) + "]");
  }
  if (k > ranked.size()) {
    throw std::invalid_argument("k = " + std::to_string(k) + " but only " + std::to_string(ranked.size()) +
                                " ranked phrases");
  }
  std::vector<const graph::RankedPhrase*> by_rank;
  for (const auto& r : ranked) by_rank.push_back(&r);
  std::stable_sort(by_rank.begin(), by_rank.end(),
                   [](const graph::RankedPhrase* a, const graph::RankedPhrase* b) { return a->rank < b->rank; });
  StructuredQuery q;
  for (std::size_t i = 0; i < k; ++i) q.phrases.push_back(by_rank[i]->phrase.text);
  q.k = k;
  q.sections = std::move(sections);
  q.match_mode = mode;
  validate(q);
  return q;
}

std::string render(const StructuredQuery& query) {
  std::string out = "(";
  for (std::size_t i = 0; i < query.phrases.size(); ++i) {
    if (i) out += " OR ";
    out += '"' + query.phrases[i] + '"';
  }
  out += ") IN (";
  for (std::size_t i = 0; i < query.sections.size(); ++i) {
    if (i) out += ", ";
    out += corpus::to_string(query.sections[i]);
  }
  out += ")";
  if (query.min_phrase_matches > 1) out += " MIN " + std::to_string(query.min_phrase_matches);
  if (query.match_mode == MatchMode::all_tokens) out += " TOKENS";
  return out;
}

nlohmann::json to_json(const StructuredQuery& query) {
  nlohmann::ordered_json j;
  j["phrases"] = query.phrases;
  j["k"] = query.k;
  j["sections"] = nlohmann::json::array();
  for (auto s : query.sections) j["sections"].push_back(std::string(corpus::to_string(s)));
  j["match_mode"] = std::string(to_string(query.match_mode));
  j["min_phrase_matches"] = query.min_phrase_matches;
  j["provenance"] = std::string(to_string(query.provenance));
  j["editor_note"] = query.editor_note;
  return nlohmann::json::parse(j.dump());
}

StructuredQuery query_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw DataError("query must be a JSON object");
    StructuredQuery q;
    q.phrases = j.at("phrases").get<std::vector<std::string>>();
    q.k = j.value("k", q.phrases.size());
    if (j.contains("sections")) {
      q.sections.clear();
      for (const auto& s : j.at("sections")) q.sections.push_back(corpus::parse_section(s.get<std::string>()));
    }
    q.match_mode = parse_match_mode(j.value("match_mode", std::string("exact_phrase")));
    q.min_phrase_matches = j.value("min_phrase_matches", std::size_t{1});
    q.provenance = parse_provenance(j.value("provenance", std::string("deterministic")));
    q.editor_note = j.value("editor_note", std::string());
    validate(q);
    return q;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed query: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("invalid query: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("invalid query: ") + e.what());
  }
}

}  // namespace priorart::retrieval
