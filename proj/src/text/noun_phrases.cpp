#include "priorart/text/noun_phrases.h"

#include <set>
#include <stdexcept>
#include <string_view>
#include <unordered_map>

#include "priorart/corpus/normalize.h"

namespace priorart::text {
namespace {

using Lexicon = std::unordered_map<std::string_view, Pos>;

const Lexicon& lexicon() {
  static const Lexicon lex = [] {
    Lexicon l;
    for (auto w : corpus::stopword_list()) l.emplace(w, Pos::function_word);
    for (auto w : {"a", "an", "the", "this", "that", "these", "those", "each", "every", "any", "some", "no", "said",
                   "such", "both", "either", "neither", "all", "another"}) {
      l[w] = Pos::determiner;
    }
    for (auto w : {"wherein", "whereby", "whereas", "wherefrom", "thereof", "therein", "thereto", "therefrom",
                   "therewith", "thereby", "therefor", "therefore", "herein", "hereof", "upon", "via", "within",
                   "without", "among", "amongst", "according", "respectively", "thereon", "whereupon", "per", "e",
                   "g", "i", "etc", "either", "least", "plus", "toward", "towards", "onto", "across", "along",
                   "beside", "besides", "beyond", "near", "since", "unless", "whether", "while", "although",
                   "though", "however", "also", "can", "may", "must", "shall", "will", "could", "would", "might",
                   "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"}) {
      l.emplace(w, Pos::function_word);
    }
    for (auto w : {"first", "second", "third", "fourth", "fifth", "sixth", "last", "next", "new", "old", "high",
                   "low", "higher", "lower", "upper", "inner", "outer", "main", "small", "large", "long", "short",
                   "wide", "narrow", "thin", "thick", "hot", "cold", "warm", "open", "closed", "front", "rear",
                   "left", "right", "single", "multiple", "different", "separate", "certain", "specific", "given",
                   "predetermined", "preset", "adjacent", "opposite", "respective", "plural", "common", "whole",
                   "entire", "full", "empty", "fixed", "mobile", "remote", "wireless", "digital", "random",
                   "dynamic", "static", "linear", "circular", "solid", "liquid", "gaseous", "rotatable", "stationary",
                   "electric", "magnetic", "optical", "thermal", "elastic", "inflatable", "secondary", "primary",
                   "auxiliary", "rotary", "spare", "active", "passive", "flexible", "rigid", "soft", "hard", "light",
                   "heavy", "fast", "slow", "quick", "early", "late", "current", "previous", "subsequent", "final",
                   "initial", "maximum", "minimum", "average", "total", "partial", "near", "far", "deep", "shallow"}) {
      l[w] = Pos::adjective;
    }
    for (auto w : {"comprise", "comprises", "comprising", "comprised", "include", "includes", "including", "contain",
                   "contains", "consist", "consists", "provide", "provides", "receive", "receives", "transmit",
                   "transmits", "generate", "generates", "determine", "determines", "transfers", "obtain", "obtains",
                   "perform", "performs", "enable", "enables", "allow", "allows", "compute", "computes", "calculate",
                   "calculates", "detect", "detects", "identify", "identifies", "select", "selects", "convert",
                   "converts", "apply", "applies", "send", "sends", "emit", "emits", "connect", "connects",
                   "extend", "extends", "rotate", "rotates", "indicate", "indicates", "represent", "represents",
                   "correspond", "corresponds", "exceed", "exceeds", "reduce", "reduces", "operate", "operates",
                   "configure", "configures", "arrange", "arranges", "encode", "encodes", "decode", "decodes",
                   "modulate", "modulates", "demodulate", "demodulates", "amplify", "amplifies", "bind", "binds",
                   "attach", "attaches", "produce", "produces", "create", "creates", "define", "defines",
                   "establish", "establishes", "assign", "assigns", "allocate", "allocates", "execute", "executes",
                   "initiate", "initiates", "terminate", "terminates", "maintain", "maintains", "prevent",
                   "prevents", "ensure", "ensures", "facilitate", "facilitates", "deliver", "delivers", "carry",
                   "carries", "couple", "couples", "coupled", "adapted", "configured", "arranged", "disposed",
                   "located", "positioned", "mounted", "connected", "based", "used", "using", "get", "gets", "make", "makes", "take", "takes", "give", "gives", "become",
                   "becomes", "remain", "remains", "seem", "seems", "require", "requires", "relate", "relates",
                   "measures", "monitors", "controls", "stores", "estimates", "increases", "decreases",
                   "flows", "passes", "causes", "forms", "moves", "acts", "serves", "uses", "has",
                   "having", "have", "is", "are", "be", "been", "being", "was", "were"}) {
      l[w] = Pos::verb;
    }
    // Words that look like participles or adjectives by suffix but name
    // things in technical text.
    for (auto w : {"housing", "bearing", "coating", "winding", "spring", "string", "ring", "thing", "building",
                   "ceiling", "fitting", "casing", "opening", "setting", "mounting", "heating", "cooling",
                   "signalling", "signaling", "sensing", "testing", "processing", "pumping", "scheduling", "timing",
                   "wiring", "packaging", "encoding", "decoding", "coding", "filling", "lighting", "cladding",
                   "seal", "signal", "terminal", "material", "metal", "interval", "crystal", "pedal", "portal",
                   "canal", "interval", "potential", "removal", "approval", "proposal", "arrival", "rental",
                   "channel", "journal", "animal", "hospital", "capital", "principal", "logic", "fabric", "traffic",
                   "music", "topic", "graphic", "clinic", "mechanic", "drive", "archive", "derivative", "olive",
                   "table", "cable", "variable", "label", "library", "boundary", "summary", "dictionary",
                   "glossary", "assembly", "supply", "family", "anomaly", "monopoly", "reply", "speed", "seed",
                   "feed", "need", "bed", "shed", "hundred", "breed", "reed", "weed", "sled", "heed",
                   "plastic", "electronic", "objective", "adhesive", "explosive", "additive", "initiative",
                   "alternative", "representative", "expressive", "oral", "dial", "trial", "vial", "denial",
                   "spiral", "mineral", "tutorial", "manual", "individual", "polynomial", "diagonal",
                   "differential"}) {
      l[w] = Pos::noun;
    }
    return l;
  }();
  return lex;
}

bool ends_with(std::string_view w, std::string_view suffix) {
  return w.size() >= suffix.size() && w.substr(w.size() - suffix.size()) == suffix;
}

}  // namespace

Pos LexiconTagger::tag_token(const std::string& token) {
  if (token.find_first_not_of("0123456789") == std::string::npos) return Pos::number;
  const auto& lex = lexicon();
  if (const auto it = lex.find(token); it != lex.end()) return it->second;

  const std::string_view w = token;
  const std::size_t n = w.size();
  if (n > 4 && ends_with(w, "ly")) return Pos::adverb;
  if (n > 4 && ends_with(w, "ing")) return Pos::verb;
  if (n > 4 && ends_with(w, "ed")) return Pos::verb;
  for (auto suffix : {"tion", "sion", "ment", "ness", "ity", "ance", "ence", "ism"}) {
    if (n > 5 && ends_with(w, suffix)) return Pos::noun;
  }
  for (auto suffix : {"al", "ic", "ous", "ive", "able", "ible", "ary", "ful", "less"}) {
    if (n > 4 && ends_with(w, suffix)) return Pos::adjective;
  }
  return Pos::noun;
}

std::vector<Pos> LexiconTagger::tag(std::span<const std::string> tokens) const {
  std::vector<Pos> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(tag_token(t));
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> chunk(std::span<const Pos> tags, std::size_t max_len) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  auto nominal = [&](std::size_t k) { return tags[k] == Pos::noun || tags[k] == Pos::adjective; };
  std::size_t i = 0;
  while (i < tags.size()) {
    // Longest [i, end) of nominal tokens, capped, that ends in a noun.
    std::size_t limit = i;
    while (limit < tags.size() && limit - i < max_len && nominal(limit)) ++limit;
    std::size_t end = limit;
    while (end > i && tags[end - 1] != Pos::noun) --end;
    if (end > i) {
      out.emplace_back(i, end);
      i = end;
    } else {
      ++i;
    }
  }
  return out;
}

std::vector<NounPhrase> extract_noun_phrases(const SentenceSet& sentences, const Tagger& tagger) {
  if (sentences.selected.empty()) throw std::invalid_argument("extract_noun_phrases: no selected sentences");
  std::vector<NounPhrase> out;
  std::set<std::string> seen;
  for (const auto& sel : sentences.selected) {
    const auto tokens = corpus::normalize_tokens(sentences.sentences.at(sel.sentence).text, false);
    const auto tags = tagger.tag(tokens);
    for (const auto& [b, e] : chunk(tags)) {
      if (e - b == 1 && corpus::is_stopword(tokens[b])) continue;
      std::string text = tokens[b];
      for (std::size_t k = b + 1; k < e; ++k) text += " " + tokens[k];
      if (!seen.insert(text).second) continue;
      out.push_back({std::move(text), tokens[e - 1], sel.sentence});
    }
  }
  return out;
}

std::vector<NounPhrase> extract_noun_phrases(const SentenceSet& sentences) {
  static const LexiconTagger tagger;
  return extract_noun_phrases(sentences, tagger);
}

}  // namespace priorart::text
