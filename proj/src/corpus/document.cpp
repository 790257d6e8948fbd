#include "priorart/corpus/document.h"

#include <algorithm>
#include <stdexcept>

#include "priorart/corpus/normalize.h"
#include "priorart/error.h"

namespace priorart::corpus {
namespace {

std::string join_lines(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out.push_back('\n');
    out += parts[i];
  }
  return out;
}

bool is_number(const std::string& token) {
  return !token.empty() && std::all_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

std::string_view to_string(Section section) noexcept {
  switch (section) {
    case Section::title: return "title";
    case Section::abstract: return "abstract";
    case Section::claims: return "claims";
    case Section::first_claim: return "first_claim";
    case Section::independent_claims: return "independent_claims";
  }
  return "unknown";
}

Section parse_section(std::string_view name) {
  for (Section s : kAllSections) {
    if (to_string(s) == name) return s;
  }
  throw std::invalid_argument("unknown section selector '" + std::string(name) + "'");
}

const std::string& PatentDocument::first_claim() const noexcept {
  static const std::string empty;
  return claims.empty() ? empty : claims.front();
}

std::string section_text(const PatentDocument& doc, Section section) {
  switch (section) {
    case Section::title: return doc.title;
    case Section::abstract: return doc.abstract;
    case Section::claims: return join_lines(doc.claims);
    case Section::first_claim: return doc.first_claim();
    case Section::independent_claims: return join_lines(doc.independent_claims);
  }
  return {};
}

std::string section_text(const PatentDocument& doc, std::string_view selector) {
  return section_text(doc, parse_section(selector));
}

std::vector<std::string> derive_independent_claims(const std::vector<std::string>& claims) {
  std::vector<std::string> out;
  for (const auto& claim : claims) {
    const auto tokens = normalize_tokens(claim, false);
    bool refers = false;
    for (std::size_t i = 0; i + 1 < tokens.size() && !refers; ++i) {
      refers = (tokens[i] == "claim" || tokens[i] == "claims") && is_number(tokens[i + 1]);
    }
    if (!refers) out.push_back(claim);
  }
  return out;
}

void validate(const PatentDocument& doc) {
  if (doc.id.empty()) throw DataError("document with empty id");
  for (const auto& ic : doc.independent_claims) {
    if (std::find(doc.claims.begin(), doc.claims.end(), ic) == doc.claims.end()) {
      throw DataError("document " + doc.id + ": independent claim not found among claims");
    }
  }
}

}  // namespace priorart::corpus
