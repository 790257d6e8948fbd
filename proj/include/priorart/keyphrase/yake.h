#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace priorart::keyphrase {

struct KeyPhrase {
  std::string text;    // lowercase normalized tokens joined by single spaces
  double score = 0.0;  // lower is more important
  std::string source;  // id of the description it came from

  friend bool operator==(const KeyPhrase&, const KeyPhrase&) = default;
};

struct ExtractOptions {
  std::size_t max_per_doc = 20;
  std::size_t window = 1;            // co-occurrence window, in tokens
  std::size_t min_term_length = 3;   // shorter terms count as stopwords
};

// Per-term statistics, exposed for diagnostics and tests.
struct TermFeatures {
  std::string term;
  bool stopword = false;
  std::size_t tf = 0;
  double casing = 0, position = 0, frequency = 0, relatedness = 0, spread = 0;
  double score = 0;  // combined term score
};

// Statistical keyphrase extraction over a single description. Candidates are
// contiguous 2- and 3-token runs inside one punctuation-delimited chunk that
// neither start nor end with a stopword and contain no numeric token.
// Output is ascending by score, ties by text, at most max_per_doc long.
// Throws std::invalid_argument when the description has no tokens.
std::vector<KeyPhrase> extract_keyphrases(std::string_view description, std::string_view source,
                                          const ExtractOptions& options = {});

std::vector<TermFeatures> term_features(std::string_view description, const ExtractOptions& options = {});

// Concatenation with exact-text duplicates removed, keeping the lowest score.
// Ascending by score, ties by text.
std::vector<KeyPhrase> dedup_union(std::span<const std::vector<KeyPhrase>> lists);

}  // namespace priorart::keyphrase
