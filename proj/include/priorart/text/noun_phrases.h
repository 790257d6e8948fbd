#pragma once

#include <span>
#include <string>
#include <vector>

#include "priorart/text/sentences.h"

namespace priorart::text {

enum class Pos { noun, adjective, verb, adverb, determiner, function_word, number };

// Assigns one tag per lower-case normalized token.
class Tagger {
 public:
  virtual ~Tagger() = default;
  virtual std::vector<Pos> tag(std::span<const std::string> tokens) const = 0;
};

// Closed-class lexicon, a list of common claim-language verbs and suffix
// rules; anything unrecognised is a noun.
class LexiconTagger final : public Tagger {
 public:
  std::vector<Pos> tag(std::span<const std::string> tokens) const override;
  static Pos tag_token(const std::string& token);
};

struct NounPhrase {
  std::string text;        // lower-case tokens joined by spaces
  std::string head_token;  // final token
  std::size_t source_sentence = 0;

  friend bool operator==(const NounPhrase&, const NounPhrase&) = default;
};

// Greedy left-to-right longest match of (ADJ|NOUN)* NOUN, 1 to 4 tokens, over
// each selected sentence. Single-token stopword chunks are dropped; repeated
// texts keep their first occurrence.
// Throws std::invalid_argument when nothing is selected.
std::vector<NounPhrase> extract_noun_phrases(const SentenceSet& sentences, const Tagger& tagger);
std::vector<NounPhrase> extract_noun_phrases(const SentenceSet& sentences);

// Chunks of one token sequence; exposed for tests.
std::vector<std::pair<std::size_t, std::size_t>> chunk(std::span<const Pos> tags, std::size_t max_len = 4);

}  // namespace priorart::text
