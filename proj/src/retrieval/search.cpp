#include "priorart/retrieval/search.h"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "priorart/corpus/normalize.h"
#include "priorart/error.h"

namespace priorart::retrieval {
namespace {

bool contains_run(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<std::ptrdiff_t>(i))) return true;
  }
  return false;
}

bool contains_all(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.empty()) return false;
  return std::all_of(needle.begin(), needle.end(),
                     [&](const std::string& t) { return std::find(hay.begin(), hay.end(), t) != hay.end(); });
}

}  // namespace

std::vector<std::string> search(const corpus::Corpus& corpus, const StructuredQuery& query) {
  validate(query);
  std::vector<std::size_t> hits(corpus.size(), 0);
  for (const auto& phrase : query.phrases) {
    const auto tokens = corpus::index_tokens(phrase);
    if (tokens.empty()) continue;
    std::vector<std::uint32_t> matched;
    for (auto section : query.sections) {
      auto docs = query.match_mode == MatchMode::exact_phrase ? corpus.index().docs_with_phrase(section, tokens)
                                                              : corpus.index().docs_with_all_tokens(section, tokens);
      matched.insert(matched.end(), docs.begin(), docs.end());
    }
    std::sort(matched.begin(), matched.end());
    matched.erase(std::unique(matched.begin(), matched.end()), matched.end());
    for (auto d : matched) ++hits[d];
  }
  std::vector<std::string> out;
  for (std::size_t d = 0; d < hits.size(); ++d) {
    if (hits[d] >= query.min_phrase_matches) out.push_back(corpus.documents()[d].id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t phrase_matches(const corpus::Corpus& corpus, std::size_t doc, const StructuredQuery& query) {
  const auto& d = corpus.documents()[doc];
  std::vector<std::vector<std::string>> sections;
  for (auto s : query.sections) sections.push_back(corpus::index_tokens(corpus::section_text(d, s)));
  std::size_t count = 0;
  for (const auto& phrase : query.phrases) {
    const auto tokens = corpus::index_tokens(phrase);
    const bool hit = std::any_of(sections.begin(), sections.end(), [&](const std::vector<std::string>& hay) {
      return query.match_mode == MatchMode::exact_phrase ? contains_run(hay, tokens) : contains_all(hay, tokens);
    });
    count += hit;
  }
  return count;
}

std::string_view to_string(ScoringSource s) noexcept {
  switch (s) {
    case ScoringSource::independent_claims: return "independent_claims";
    case ScoringSource::first_claim: return "first_claim";
    case ScoringSource::claims: return "claims";
    case ScoringSource::none: return "none";
  }
  return "none";
}

ScoringSource parse_scoring_source(std::string_view name) {
  for (auto s : {ScoringSource::independent_claims, ScoringSource::first_claim, ScoringSource::claims,
                 ScoringSource::none}) {
    if (to_string(s) == name) return s;
  }
  throw DataError("unknown scoring source '" + std::string(name) + "'");
}

double weighted_score(std::vector<double> cosines) {
  std::sort(cosines.begin(), cosines.end(), std::greater<>());
  double sum = 0;
  for (std::size_t j = 0; j < cosines.size(); ++j) sum += cosines[j] / static_cast<double>(j + 1);
  return sum;
}

std::pair<std::string, ScoringSource> scoring_text(const corpus::PatentDocument& doc) {
  auto has_text = [](const std::string& s) { return !corpus::normalize_tokens(s, false).empty(); };
  const auto independent = corpus::section_text(doc, corpus::Section::independent_claims);
  if (has_text(independent)) return {independent, ScoringSource::independent_claims};
  if (has_text(doc.first_claim())) return {doc.first_claim(), ScoringSource::first_claim};
  const auto all = corpus::section_text(doc, corpus::Section::claims);
  if (has_text(all)) return {all, ScoringSource::claims};
  return {std::string(), ScoringSource::none};
}

std::vector<RankedResult> rank_results(const corpus::Corpus& corpus, std::span<const std::string> retrieved,
                                       std::span<const std::string> query_phrases,
                                       const embedding::EmbeddingProvider& embedder, const RankOptions& options) {
  if (retrieved.empty()) throw std::invalid_argument("rank_results: nothing retrieved");
  if (query_phrases.empty()) throw std::invalid_argument("rank_results: no query phrases");
  if (options.lambda < 0) throw std::invalid_argument("rank_results: lambda must be non-negative");

  std::vector<std::string> unique_ids(retrieved.begin(), retrieved.end());
  std::sort(unique_ids.begin(), unique_ids.end());
  if (std::adjacent_find(unique_ids.begin(), unique_ids.end()) != unique_ids.end()) {
    throw std::invalid_argument("rank_results: duplicate document id");
  }

  std::vector<RankedResult> out(retrieved.size());
  std::vector<std::string> texts;
  std::vector<std::size_t> text_owner;
  for (std::size_t i = 0; i < retrieved.size(); ++i) {
    const auto& doc = corpus.at(retrieved[i]);
    auto [text, source] = scoring_text(doc);
    out[i].doc_id = doc.id;
    out[i].source = source;
    if (source != ScoringSource::none) {
      texts.push_back(std::move(text));
      text_owner.push_back(i);
    }
  }
  const std::vector<std::string> phrases(query_phrases.begin(), query_phrases.end());
  const auto phrase_vecs = embedder.embed_batch(phrases);
  const auto doc_vecs = embedder.embed_batch(texts);

  for (std::size_t t = 0; t < texts.size(); ++t) {
    auto& r = out[text_owner[t]];
    for (std::size_t p = 0; p < phrases.size(); ++p) {
      const double c = embedding::cosine(doc_vecs[t], phrase_vecs[p]);
      if (c > options.tau_match) r.matches.push_back({phrases[p], c});
    }
    std::sort(r.matches.begin(), r.matches.end(), [](const Match& a, const Match& b) {
      if (a.cosine != b.cosine) return a.cosine > b.cosine;
      return a.phrase < b.phrase;
    });
  }
  for (auto& r : out) {
    r.match_count = r.matches.size();
    std::vector<double> cosines;
    for (const auto& m : r.matches) cosines.push_back(m.cosine);
    r.weighted = weighted_score(std::move(cosines));
    r.final_score = r.weighted + options.lambda * static_cast<double>(r.match_count);
  }
  std::sort(out.begin(), out.end(), [](const RankedResult& a, const RankedResult& b) {
    if (a.final_score != b.final_score) return a.final_score > b.final_score;
    if (a.match_count != b.match_count) return a.match_count > b.match_count;
    return a.doc_id < b.doc_id;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
  return out;
}

}  // namespace priorart::retrieval
