#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "priorart/corpus/document.h"
#include "priorart/embedding/provider.h"
#include "priorart/keyphrase/yake.h"

namespace priorart::text {

struct Sentence {
  std::string text;
  std::size_t begin = 0;  // byte span in the source text
  std::size_t end = 0;
};

struct Selection {
  std::size_t sentence = 0;  // index into SentenceSet::sentences
  std::string keyphrase;     // best-matching keyphrase
  double similarity = 0.0;
};

struct SentenceSet {
  std::vector<Sentence> sentences;
  std::vector<Selection> selected;  // ascending by sentence index
};

// Title, abstract and every claim, separated by blank lines.
std::string patent_text(const corpus::PatentDocument& doc);

// Rule-based segmentation. A sentence ends at '.', '!' or '?' followed by
// whitespace and then an upper-case letter or digit (or the end of text),
// unless the word before the mark is an abbreviation (fig, no, e.g, i.e, vs,
// u.s). Blank lines and claim numbers ("2." at line start) also start a new
// sentence. Throws std::invalid_argument on text with no non-space content.
SentenceSet split_sentences(std::string_view text);

// Keeps sentence j when max_i cos(embed(kp_i), embed(s_j)) > threshold and
// records the argmax keyphrase (the earlier one on ties).
// Throws std::invalid_argument on an empty keyphrase list or a threshold
// outside [-1, 1].
SentenceSet select_sentences(SentenceSet sentences, std::span<const keyphrase::KeyPhrase> keyphrases,
                             const embedding::EmbeddingProvider& embedder, double threshold);

}  // namespace priorart::text
