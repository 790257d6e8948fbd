#include <doctest.h>

#include <fstream>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "priorart/corpus/normalize.h"

using priorart::corpus::is_stopword;
using priorart::corpus::normalize;
using priorart::corpus::stopword_list;

namespace {

using Tokens = std::vector<std::string>;

std::string encode_utf8(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

std::string random_text(std::mt19937_64& rng) {
  static const char32_t pool[] = {U'a', U'Z', U'0', U'9', U' ', U'-', U'.', U'\n', U'\t', U'é', U'Ö', U'ß',
                                  U'ﬁ', U'Ａ', U'²', U'½', U'Ω', U'中', U'́', U'😀', U'İ', U'ǅ', U'㎒'};
  std::uniform_int_distribution<std::size_t> len(0, 40);
  std::uniform_int_distribution<std::size_t> pick(0, std::size(pool) - 1);
  std::string s;
  const auto n = len(rng);
  for (std::size_t i = 0; i < n; ++i) s += encode_utf8(pool[pick(rng)]);
  return s;
}

}  // namespace

TEST_CASE("normalize folds case, diacritics and punctuation") {
  CHECK(normalize("Tyre-Pressure Température!", false).tokens == Tokens{"tyre", "pressure", "temperature"});
  CHECK(normalize("", false).tokens.empty());
  CHECK(normalize("the of and", true).tokens.empty());
  CHECK(normalize("the of and", false).tokens == Tokens{"the", "of", "and"});
}

TEST_CASE("normalize keeps digits as token characters") {
  CHECK(normalize("US2019053227A1, claim 12", false).tokens == Tokens{"us2019053227a1", "claim", "12"});
}

TEST_CASE("normalize treats malformed UTF-8 as a separator") {
  const std::string bad = std::string("abc") + '\xC3' + "def" + '\xFF' + "ghi" + '\xE2' + '\x82';
  CHECK(normalize(bad, false).tokens == Tokens{"abc", "def", "ghi"});
}

TEST_CASE("bundled stopword list") {
  CHECK(stopword_list().size() == 179);
  CHECK(is_stopword("the"));
  CHECK(is_stopword("wouldn"));
  CHECK_FALSE(is_stopword("transformer"));
}

TEST_CASE("source offsets point back into the raw text") {
  const std::string raw = "Öffnung  the Crème-brûlée";
  const auto n = normalize(raw, true);
  REQUIRE(n.tokens == Tokens{"offnung", "creme", "brulee"});
  CHECK(raw.substr(n.source_offsets[0].begin, n.source_offsets[0].end - n.source_offsets[0].begin) == "Öffnung");
  CHECK(raw.substr(n.source_offsets[1].begin, n.source_offsets[1].end - n.source_offsets[1].begin) == "Crème");
  CHECK(raw.substr(n.source_offsets[2].begin, n.source_offsets[2].end - n.source_offsets[2].begin) == "brûlée");
}

TEST_CASE("golden normalization cases reproduce byte-identically") {
  std::ifstream in(PRIORART_TEST_DATA_DIR "/normalization_golden.jsonl", std::ios::binary);
  REQUIRE(in);
  std::string line;
  int cases = 0;
  while (std::getline(in, line)) {
    const auto rec = nlohmann::json::parse(line);
    const auto input = rec["input"].get<std::string>();
    const auto expected = rec["tokens"].get<Tokens>();
    INFO("input: " << input);
    CHECK(normalize(input, rec["remove_stopwords"].get<bool>()).tokens == expected);
    ++cases;
  }
  CHECK(cases == 50);
}

TEST_CASE("normalization is idempotent and tokens stay in [a-z0-9]") {
  std::mt19937_64 rng(20240501);
  for (int i = 0; i < 500; ++i) {
    const auto raw = random_text(rng);
    for (bool remove : {false, true}) {
      const auto first = normalize(raw, remove);
      CHECK(normalize(first.render(), remove).tokens == first.tokens);
      CHECK(first.tokens.size() == first.source_offsets.size());
      for (const auto& t : first.tokens) {
        CHECK_FALSE(t.empty());
        CHECK(t.find_first_not_of("abcdefghijklmnopqrstuvwxyz0123456789") == std::string::npos);
        if (remove) CHECK_FALSE(is_stopword(t));
      }
    }
  }
}
