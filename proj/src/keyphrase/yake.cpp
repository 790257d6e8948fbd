#include "priorart/keyphrase/yake.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "priorart/corpus/normalize.h"

namespace priorart::keyphrase {
namespace {

// Per-occurrence casing/content tags.
enum class Tag { digit, unusual, acronym, capitalized, plain };

struct Occurrence {
  std::string token;     // normalized surface token
  std::size_t term = 0;  // index into Document::terms
  Tag tag = Tag::plain;
  std::size_t sentence = 0;
};

struct Term {
  std::string text;
  bool stopword = false;
  std::size_t tf = 0;
  std::size_t tf_acronym = 0;
  std::size_t tf_capitalized = 0;
  std::set<std::size_t> sentences;
  TermFeatures features;
};

struct Document {
  std::vector<Term> terms;
  std::vector<std::vector<Occurrence>> blocks;  // punctuation-delimited chunks
  std::size_t sentence_count = 0;
  // Directed co-occurrence counts (left term, right term).
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> edges;
};

bool ends_sentence(std::string_view text, std::size_t i) {
  const char c = text[i];
  if (c != '.' && c != '!' && c != '?') return false;
  return i + 1 == text.size() || text[i + 1] == ' ' || text[i + 1] == '\t' || text[i + 1] == '\n' ||
         text[i + 1] == '\r';
}

bool ends_block(char c) {
  static constexpr std::string_view kBreaks = ",;:()[]{}\"<>|.!?";
  return kBreaks.find(c) != std::string_view::npos;
}

bool is_excluded(Tag t) { return t == Tag::digit || t == Tag::unusual; }

Tag classify(const std::string& term, std::string_view surface, std::size_t index_in_sentence) {
  const bool has_digit = std::any_of(term.begin(), term.end(), [](char c) { return c >= '0' && c <= '9'; });
  const bool has_alpha = std::any_of(term.begin(), term.end(), [](char c) { return c >= 'a' && c <= 'z'; });
  if (has_digit && !has_alpha) return Tag::digit;
  if (has_digit) return Tag::unusual;
  std::size_t upper = 0, lower = 0;
  for (char c : surface) {
    if (c >= 'A' && c <= 'Z') ++upper;
    if (c >= 'a' && c <= 'z') ++lower;
  }
  if (upper > 0 && lower == 0) return Tag::acronym;
  if (surface.size() > 1 && surface[0] >= 'A' && surface[0] <= 'Z' && upper == 1 && index_in_sentence > 0) {
    return Tag::capitalized;
  }
  return Tag::plain;
}

// Terms are counted with a trailing plural 's' removed, so "transformers"
// and "transformer" share statistics.
std::string fold_plural(const std::string& token) {
  if (token.size() > 3 && token.back() == 's') return token.substr(0, token.size() - 1);
  return token;
}

bool term_is_stopword(const std::string& token, const std::string& term, std::size_t min_length) {
  return corpus::is_stopword(token) || corpus::is_stopword(term) || term.size() < min_length;
}

Document parse(std::string_view text, const ExtractOptions& options) {
  Document doc;
  std::unordered_map<std::string, std::size_t> index;

  std::size_t sentence_words = 0;
  auto flush_block = [&](std::size_t begin, std::size_t end) {
    if (end <= begin) return;
    const auto block_text = text.substr(begin, end - begin);
    const auto norm = corpus::normalize(block_text, false);
    if (norm.empty()) return;
    std::vector<Occurrence> block;
    for (std::size_t k = 0; k < norm.tokens.size(); ++k) {
      const auto& tok = norm.tokens[k];
      const auto span = norm.source_offsets[k];
      const auto folded = fold_plural(tok);
      auto [it, inserted] = index.emplace(folded, doc.terms.size());
      if (inserted) {
        Term t;
        t.text = folded;
        t.stopword = term_is_stopword(tok, folded, options.min_term_length);
        doc.terms.push_back(std::move(t));
      }
      Occurrence occ;
      occ.token = tok;
      occ.term = it->second;
      occ.tag = classify(tok, block_text.substr(span.begin, span.end - span.begin), sentence_words++);
      occ.sentence = doc.sentence_count;
      auto& term = doc.terms[occ.term];
      ++term.tf;
      if (occ.tag == Tag::acronym) ++term.tf_acronym;
      if (occ.tag == Tag::capitalized) ++term.tf_capitalized;
      term.sentences.insert(occ.sentence);

      if (!is_excluded(occ.tag)) {
        const std::size_t from = block.size() > options.window ? block.size() - options.window : 0;
        for (std::size_t j = from; j < block.size(); ++j) {
          if (!is_excluded(block[j].tag)) ++doc.edges[{block[j].term, occ.term}];
        }
      }
      block.push_back(occ);
    }
    doc.blocks.push_back(std::move(block));
  };

  std::size_t block_begin = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    const bool at_end = i == text.size();
    const bool sentence_end = !at_end && ends_sentence(text, i);
    if (at_end || sentence_end || ends_block(text[i])) {
      flush_block(block_begin, i);
      block_begin = i + 1;
    }
    if ((at_end || sentence_end) && sentence_words > 0) {
      ++doc.sentence_count;
      sentence_words = 0;
    }
  }
  return doc;
}

double median(const std::set<std::size_t>& values) {
  std::vector<double> v(values.begin(), values.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

void score_terms(Document& doc) {
  std::size_t max_tf = 0;
  std::vector<double> valid_tf;
  for (const auto& t : doc.terms) {
    max_tf = std::max(max_tf, t.tf);
    if (!t.stopword) valid_tf.push_back(static_cast<double>(t.tf));
  }
  double mean = 0, stddev = 0;
  if (!valid_tf.empty()) {
    mean = std::accumulate(valid_tf.begin(), valid_tf.end(), 0.0) / static_cast<double>(valid_tf.size());
    double ss = 0;
    for (double x : valid_tf) ss += (x - mean) * (x - mean);
    stddev = std::sqrt(ss / static_cast<double>(valid_tf.size()));
  }

  // Distinct neighbours and total co-occurrence weight on each side.
  std::vector<std::size_t> left_distinct(doc.terms.size()), left_weight(doc.terms.size());
  std::vector<std::size_t> right_distinct(doc.terms.size()), right_weight(doc.terms.size());
  for (const auto& [edge, weight] : doc.edges) {
    ++right_distinct[edge.first];
    right_weight[edge.first] += weight;
    ++left_distinct[edge.second];
    left_weight[edge.second] += weight;
  }

  for (std::size_t i = 0; i < doc.terms.size(); ++i) {
    auto& t = doc.terms[i];
    auto& f = t.features;
    const double tf = static_cast<double>(t.tf);
    const double pl = left_weight[i] ? static_cast<double>(left_distinct[i]) / static_cast<double>(left_weight[i]) : 0;
    const double pr = right_weight[i] ? static_cast<double>(right_distinct[i]) / static_cast<double>(right_weight[i]) : 0;
    f.term = t.text;
    f.stopword = t.stopword;
    f.tf = t.tf;
    f.relatedness = (0.5 + pl * tf / static_cast<double>(max_tf)) + (0.5 + pr * tf / static_cast<double>(max_tf));
    f.frequency = mean + stddev > 0 ? tf / (mean + stddev) : 0;
    f.spread = static_cast<double>(t.sentences.size()) / static_cast<double>(doc.sentence_count);
    f.casing = static_cast<double>(std::max(t.tf_acronym, t.tf_capitalized)) / (1.0 + std::log(tf));
    f.position = std::log(std::log(3.0 + median(t.sentences)));
    f.score = (f.position * f.relatedness) / (f.casing + f.frequency / f.relatedness + f.spread / f.relatedness);
  }
}

struct Candidate {
  std::vector<std::size_t> terms;
  std::size_t tf = 0;
  bool clean_occurrence = false;  // some occurrence free of numeric tokens
};

double candidate_score(const Document& doc, const Candidate& c) {
  double sum = 0, prod = 1;
  for (std::size_t k = 0; k < c.terms.size(); ++k) {
    const auto& t = doc.terms[c.terms[k]];
    if (!t.stopword) {
      sum += t.features.score;
      prod *= t.features.score;
      continue;
    }
    // Interior stopword: weight by how strongly it binds its neighbours.
    double p_left = 0, p_right = 0;
    if (k > 0) {
      const auto it = doc.edges.find({c.terms[k - 1], c.terms[k]});
      if (it != doc.edges.end()) p_left = static_cast<double>(it->second) / static_cast<double>(doc.terms[c.terms[k - 1]].tf);
    }
    if (k + 1 < c.terms.size()) {
      const auto it = doc.edges.find({c.terms[k], c.terms[k + 1]});
      if (it != doc.edges.end()) p_right = static_cast<double>(it->second) / static_cast<double>(doc.terms[c.terms[k + 1]].tf);
    }
    const double p = p_left * p_right;
    prod *= 2.0 - p;
    sum -= 1.0 - p;
  }
  return prod / ((sum + 1.0) * static_cast<double>(c.tf));
}

bool by_score_then_text(const KeyPhrase& a, const KeyPhrase& b) {
  if (a.score != b.score) return a.score < b.score;
  return a.text < b.text;
}

}  // namespace

std::vector<TermFeatures> term_features(std::string_view description, const ExtractOptions& options) {
  auto doc = parse(description, options);
  if (doc.terms.empty()) throw std::invalid_argument("keyphrase extraction: empty description");
  score_terms(doc);
  std::vector<TermFeatures> out;
  for (const auto& t : doc.terms) out.push_back(t.features);
  return out;
}

std::vector<KeyPhrase> extract_keyphrases(std::string_view description, std::string_view source,
                                          const ExtractOptions& options) {
  auto doc = parse(description, options);
  if (doc.terms.empty()) throw std::invalid_argument("keyphrase extraction: empty description");
  score_terms(doc);

  std::map<std::string, Candidate> candidates;
  for (const auto& block : doc.blocks) {
    for (std::size_t n = 2; n <= 3; ++n) {
      for (std::size_t i = 0; i + n <= block.size(); ++i) {
        std::string key;
        bool clean = true;
        std::vector<std::size_t> terms;
        for (std::size_t k = i; k < i + n; ++k) {
          if (k > i) key.push_back(' ');
          key += block[k].token;
          terms.push_back(block[k].term);
          clean = clean && !is_excluded(block[k].tag);
        }
        auto& c = candidates[key];
        if (c.tf == 0) c.terms = std::move(terms);
        ++c.tf;
        c.clean_occurrence = c.clean_occurrence || clean;
      }
    }
  }

  std::vector<KeyPhrase> out;
  for (const auto& [key, c] : candidates) {
    if (!c.clean_occurrence) continue;
    if (doc.terms[c.terms.front()].stopword || doc.terms[c.terms.back()].stopword) continue;
    out.push_back({key, candidate_score(doc, c), std::string(source)});
  }
  std::sort(out.begin(), out.end(), by_score_then_text);
  if (out.size() > options.max_per_doc) out.resize(options.max_per_doc);
  return out;
}

std::vector<KeyPhrase> dedup_union(std::span<const std::vector<KeyPhrase>> lists) {
  std::map<std::string, KeyPhrase> best;
  for (const auto& list : lists) {
    for (const auto& kp : list) {
      auto [it, inserted] = best.emplace(kp.text, kp);
      // On equal scores keep the lexicographically smaller source so the
      // result does not depend on list order.
      if (!inserted && (kp.score < it->second.score || (kp.score == it->second.score && kp.source < it->second.source))) {
        it->second = kp;
      }
    }
  }
  std::vector<KeyPhrase> out;
  out.reserve(best.size());
  for (auto& [text, kp] : best) out.push_back(std::move(kp));
  std::sort(out.begin(), out.end(), by_score_then_text);
  return out;
}

}  // namespace priorart::keyphrase
