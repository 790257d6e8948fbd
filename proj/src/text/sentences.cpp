#include "priorart/text/sentences.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>

#include "priorart/embedding/vector.h"

namespace priorart::text {
namespace {

constexpr std::array<std::string_view, 6> kAbbreviations = {"fig", "no", "e.g", "i.e", "vs", "u.s"};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Lower-cased word (letters and inner dots) that ends right before `dot`.
std::string word_before(std::string_view text, std::size_t dot) {
  std::size_t b = dot;
  while (b > 0 && (std::isalpha(static_cast<unsigned char>(text[b - 1])) || text[b - 1] == '.')) --b;
  std::string w(text.substr(b, dot - b));
  for (auto& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return w;
}

bool is_abbreviation(std::string_view text, std::size_t dot) {
  const auto w = word_before(text, dot);
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), w) != kAbbreviations.end();
}

// Position `i` is at the start of a line that begins with "<digits>.".
bool claim_number_at(std::string_view text, std::size_t i) {
  if (i > 0 && text[i - 1] != '\n') return false;
  std::size_t j = i;
  while (j < text.size() && (text[j] == ' ' || text[j] == '\t')) ++j;
  const std::size_t digits = j;
  while (j < text.size() && is_digit(text[j])) ++j;
  return j > digits && j < text.size() && text[j] == '.';
}

// The '.' at `dot` closes a claim number ("12." at the start of a line or of
// the text).
bool is_claim_number_dot(std::string_view text, std::size_t dot) {
  std::size_t b = dot;
  while (b > 0 && is_digit(text[b - 1])) --b;
  if (b == dot) return false;
  while (b > 0 && (text[b - 1] == ' ' || text[b - 1] == '\t')) --b;
  return b == 0 || text[b - 1] == '\n';
}

}  // namespace

std::string patent_text(const corpus::PatentDocument& doc) {
  std::vector<std::string_view> parts;
  if (!doc.title.empty()) parts.push_back(doc.title);
  if (!doc.abstract.empty()) parts.push_back(doc.abstract);
  for (const auto& c : doc.claims) parts.push_back(c);
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += "\n\n";
    out += parts[i];
  }
  return out;
}

SentenceSet split_sentences(std::string_view text) {
  if (std::all_of(text.begin(), text.end(), is_space)) {
    throw std::invalid_argument("split_sentences: empty text");
  }
  SentenceSet out;
  auto emit = [&](std::size_t b, std::size_t e) {
    while (b < e && is_space(text[b])) ++b;
    while (e > b && is_space(text[e - 1])) --e;
    if (b < e) out.sentences.push_back({std::string(text.substr(b, e - b)), b, e});
  };

  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      // Blank line: paragraph break.
      std::size_t j = i + 1;
      while (j < text.size() && (text[j] == ' ' || text[j] == '\t' || text[j] == '\r')) ++j;
      if (j < text.size() && text[j] == '\n') {
        emit(start, i);
        start = j;
        continue;
      }
      if (i + 1 < text.size() && claim_number_at(text, i + 1)) {
        emit(start, i);
        start = i + 1;
      }
      continue;
    }
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t j = i + 1;
    if (j < text.size() && !is_space(text[j])) continue;
    while (j < text.size() && is_space(text[j])) ++j;
    const bool next_starts = j == text.size() || std::isupper(static_cast<unsigned char>(text[j])) || is_digit(text[j]);
    if (!next_starts) continue;
    if (c == '.' && (is_abbreviation(text, i) || is_claim_number_dot(text, i))) continue;
    emit(start, i + 1);
    start = i + 1;
  }
  emit(start, text.size());
  return out;
}

SentenceSet select_sentences(SentenceSet sentences, std::span<const keyphrase::KeyPhrase> keyphrases,
                             const embedding::EmbeddingProvider& embedder, double threshold) {
  if (keyphrases.empty()) throw std::invalid_argument("select_sentences: no keyphrases");
  if (!(threshold >= -1.0 && threshold <= 1.0)) throw std::invalid_argument("select_sentences: threshold outside [-1, 1]");

  std::vector<std::string> kp_texts;
  for (const auto& kp : keyphrases) kp_texts.push_back(kp.text);
  std::vector<std::string> s_texts;
  for (const auto& s : sentences.sentences) s_texts.push_back(s.text);
  const auto kp_vecs = embedder.embed_batch(kp_texts);
  const auto s_vecs = embedder.embed_batch(s_texts);

  sentences.selected.clear();
  for (std::size_t j = 0; j < s_vecs.size(); ++j) {
    std::size_t best = 0;
    double best_cos = embedding::cosine(kp_vecs[0], s_vecs[j]);
    for (std::size_t i = 1; i < kp_vecs.size(); ++i) {
      const double c = embedding::cosine(kp_vecs[i], s_vecs[j]);
      if (c > best_cos) {
        best_cos = c;
        best = i;
      }
    }
    if (best_cos > threshold) sentences.selected.push_back({j, kp_texts[best], best_cos});
  }
  return sentences;
}

}  // namespace priorart::text
