#include "priorart/corpus/normalize.h"

#include <algorithm>
#include <cstdint>
#include <unordered_set>

#include "stopword_data.h"

namespace priorart::corpus {
namespace {

struct FoldEntry {
  std::uint32_t code_point;
  const char* folded;
};

constexpr FoldEntry kFoldTable[] = {
#include "unicode_fold_table.inc"
};

constexpr std::uint32_t kReplacement = 0xFFFD;

// Decodes one code point starting at `pos`; advances `pos`. Malformed input
// (truncated, overlong, surrogate, out of range) consumes one byte.
std::uint32_t decode_utf8(std::string_view s, std::size_t& pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  int extra = 0;
  std::uint32_t cp = 0;
  std::uint32_t min = 0;
  if ((b0 & 0xE0) == 0xC0) {
    extra = 1, cp = b0 & 0x1F, min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    extra = 2, cp = b0 & 0x0F, min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    extra = 3, cp = b0 & 0x07, min = 0x10000;
  } else {
    ++pos;
    return kReplacement;
  }
  if (pos + extra >= s.size()) {
    ++pos;
    return kReplacement;
  }
  for (int i = 1; i <= extra; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) {
      ++pos;
      return kReplacement;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++pos;
    return kReplacement;
  }
  pos += extra + 1;
  return cp;
}

// nullptr means "fold to a single space".
const char* fold_non_ascii(std::uint32_t cp) {
  const auto* end = std::end(kFoldTable);
  const auto* it = std::lower_bound(std::begin(kFoldTable), end, cp,
                                    [](const FoldEntry& e, std::uint32_t v) { return e.code_point < v; });
  if (it != end && it->code_point == cp) return it->folded;
  return nullptr;
}

bool is_token_char(char c) noexcept { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'); }

const std::unordered_set<std::string_view>& stopword_set() {
  static const std::unordered_set<std::string_view> set(std::begin(detail::kStopwords),
                                                        std::end(detail::kStopwords));
  return set;
}

}  // namespace

std::string NormalizedText::render() const {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

NormalizedText normalize(std::string_view raw, bool remove_stopwords) {
  NormalizedText result;
  std::string current;
  TokenSpan span;

  auto flush = [&] {
    if (current.empty()) return;
    if (!(remove_stopwords && is_stopword(current))) {
      result.tokens.push_back(std::move(current));
      result.source_offsets.push_back(span);
    }
    current.clear();
  };
  auto emit = [&](char c, std::size_t begin, std::size_t end) {
    if (!is_token_char(c)) {
      flush();
      return;
    }
    if (current.empty()) span.begin = begin;
    span.end = end;
    current.push_back(c);
  };

  std::size_t pos = 0;
  while (pos < raw.size()) {
    const std::size_t begin = pos;
    const std::uint32_t cp = decode_utf8(raw, pos);
    if (cp < 0x80) {
      char c = static_cast<char>(cp);
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      emit(c, begin, pos);
      continue;
    }
    const char* folded = fold_non_ascii(cp);
    if (folded == nullptr) {
      flush();
      continue;
    }
    for (const char* p = folded; *p != '\0'; ++p) emit(*p, begin, pos);
  }
  flush();
  return result;
}

std::vector<std::string> normalize_tokens(std::string_view raw, bool remove_stopwords) {
  return normalize(raw, remove_stopwords).tokens;
}

bool is_stopword(std::string_view token) noexcept { return stopword_set().contains(token); }

std::span<const std::string_view> stopword_list() noexcept { return detail::kStopwords; }

}  // namespace priorart::corpus
