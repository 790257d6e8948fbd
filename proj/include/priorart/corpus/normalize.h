#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace priorart::corpus {

// Tag persisted with every corpus. Bump whenever normalize() output changes.
// "keep-digits" records that [0-9] survive as token characters.
inline constexpr std::string_view kNormalizationVersion =
    "nv1;nfkd-strip-marks;lower;ascii-alnum;keep-digits;stopwords-en-179";

// Byte span [begin, end) into the raw UTF-8 input.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

struct NormalizedText {
  std::vector<std::string> tokens;
  std::vector<TokenSpan> source_offsets;  // parallel to tokens

  // Space-joined tokens.
  std::string render() const;
  bool empty() const noexcept { return tokens.empty(); }
};

// Folds raw UTF-8 text into lowercase ASCII alphanumeric tokens:
//   1. compatibility decomposition, combining marks dropped
//   2. lowercasing
//   3. every character outside [a-z0-9] becomes a space
//   4. whitespace runs collapse, tokens split on single spaces
//   5. optional removal of bundled stopwords
// Invalid UTF-8 bytes are treated as U+FFFD and therefore become spaces.
NormalizedText normalize(std::string_view raw, bool remove_stopwords);

// Token list only, for callers that do not need offsets.
std::vector<std::string> normalize_tokens(std::string_view raw, bool remove_stopwords);

bool is_stopword(std::string_view token) noexcept;

// The bundled list in file order.
std::span<const std::string_view> stopword_list() noexcept;

}  // namespace priorart::corpus
