#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "priorart/corpus/ipc_code.h"

namespace priorart::corpus {

enum class Section { title, abstract, claims, first_claim, independent_claims };

inline constexpr std::array<Section, 5> kAllSections = {
    Section::title, Section::abstract, Section::claims, Section::first_claim, Section::independent_claims};

inline constexpr std::size_t kSectionCount = kAllSections.size();

std::string_view to_string(Section section) noexcept;

// Accepts the selector names used on the command line and in JSON
// ("title", "abstract", "claims", "first_claim", "independent_claims").
// Throws std::invalid_argument for anything else.
Section parse_section(std::string_view name);

struct PatentDocument {
  std::string id;
  std::string title;
  std::string abstract;
  std::vector<std::string> claims;
  std::vector<std::string> independent_claims;
  std::vector<IpcCode> ipc_codes;
  std::vector<std::string> cited_by_examiner;

  // Which optional record fields were present in the source, so export can
  // reproduce the record without inventing fields.
  bool has_title = false;
  bool has_abstract = false;
  bool has_independent_claims = false;
  bool has_citations = false;

  // claims[0], or empty when the document has no claims.
  const std::string& first_claim() const noexcept;
};

// Raw text of one section. Multi-part sections are joined with '\n'.
std::string section_text(const PatentDocument& doc, Section section);
std::string section_text(const PatentDocument& doc, std::string_view selector);

// Claims that do not refer to another claim ("claim 3", "claims 1"), found
// on the normalized claim text.
std::vector<std::string> derive_independent_claims(const std::vector<std::string>& claims);

// Throws DataError when an invariant of the record does not hold.
void validate(const PatentDocument& doc);

}  // namespace priorart::corpus
