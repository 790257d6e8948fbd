#pragma once

#include <span>
#include <string>
#include <vector>

#include "priorart/corpus/corpus.h"
#include "priorart/embedding/provider.h"
#include "priorart/retrieval/query.h"

namespace priorart::retrieval {

// Ids of the documents matched by at least min_phrase_matches query phrases,
// ascending. A phrase matches a section when its index tokens occur there
// contiguously (exact_phrase) or all of them occur anywhere (all_tokens). A
// phrase that normalizes to no index tokens matches nothing.
std::vector<std::string> search(const corpus::Corpus& corpus, const StructuredQuery& query);

// Per-document phrase hits, for diagnostics: how many query phrases matched.
std::size_t phrase_matches(const corpus::Corpus& corpus, std::size_t doc, const StructuredQuery& query);

struct Match {
  std::string phrase;
  double cosine = 0;

  friend bool operator==(const Match&, const Match&) = default;
};

// Where a document's scoring text came from.
enum class ScoringSource { independent_claims, first_claim, claims, none };
std::string_view to_string(ScoringSource s) noexcept;
ScoringSource parse_scoring_source(std::string_view name);

struct RankedResult {
  std::string doc_id;
  std::vector<Match> matches;  // cosine descending, then phrase
  std::size_t match_count = 0;
  double weighted = 0;
  double final_score = 0;
  std::size_t rank = 0;
  ScoringSource source = ScoringSource::independent_claims;

  friend bool operator==(const RankedResult&, const RankedResult&) = default;
};

struct RankOptions {
  double tau_match = 0.6;  // kept when cosine is strictly above
  double lambda = 0.5;     // weight of the match count
};

// Sum of cosines sorted descending, the j-th divided by j.
double weighted_score(std::vector<double> cosines);

// Scoring text: independent claims, else the first claim, else all claims.
std::pair<std::string, ScoringSource> scoring_text(const corpus::PatentDocument& doc);

// Scores every retrieved document against the query phrases; never drops a
// document. Sorted by final score descending, then match count descending,
// then id. Documents without claim text get zero matches and source `none`.
// Throws std::invalid_argument when `retrieved` is empty or lambda < 0, and
// DataError for an id not in the corpus.
std::vector<RankedResult> rank_results(const corpus::Corpus& corpus, std::span<const std::string> retrieved,
                                       std::span<const std::string> query_phrases,
                                       const embedding::EmbeddingProvider& embedder, const RankOptions& options = {});

}  // namespace priorart::retrieval
