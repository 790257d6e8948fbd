#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "priorart/corpus/document.h"
#include "priorart/corpus/ipc_code.h"

namespace priorart::corpus {

struct Posting {
  std::uint32_t doc = 0;       // ordinal in Corpus::documents()
  std::uint32_t position = 0;  // token position inside the section

  friend bool operator==(const Posting&, const Posting&) = default;
  friend auto operator<=>(const Posting&, const Posting&) = default;
};

// Positional inverted index over the stopword-filtered normalized tokens of
// every section of every document.
class SectionIndex {
 public:
  using PostingMap = std::map<std::string, std::vector<Posting>, std::less<>>;

  static SectionIndex build(std::span<const PatentDocument> documents);

  const PostingMap& postings(Section section) const noexcept {
    return sections_[static_cast<std::size_t>(section)];
  }

  // Documents whose `section` contains `tokens` contiguously.
  std::vector<std::uint32_t> docs_with_phrase(Section section, std::span<const std::string> tokens) const;

  // Documents whose `section` contains every one of `tokens`, anywhere.
  std::vector<std::uint32_t> docs_with_all_tokens(Section section, std::span<const std::string> tokens) const;

  std::size_t term_count(Section section) const noexcept { return postings(section).size(); }

  void write(std::ostream& out) const;
  static SectionIndex read(std::istream& in);

  friend bool operator==(const SectionIndex&, const SectionIndex&) = default;

 private:
  const std::vector<Posting>* find(Section section, std::string_view token) const;

  std::array<PostingMap, kSectionCount> sections_;
};

// Tokens fed to the section index for one piece of text.
std::vector<std::string> index_tokens(std::string_view text);

// Immutable, id-indexed collection of documents plus its section index.
class Corpus {
 public:
  Corpus() = default;

  // Validates every document and id uniqueness, then builds the index.
  static Corpus from_documents(std::vector<PatentDocument> documents);

  std::span<const PatentDocument> documents() const noexcept { return documents_; }
  std::size_t size() const noexcept { return documents_.size(); }

  const PatentDocument* find(std::string_view id) const noexcept;
  const PatentDocument& at(std::string_view id) const;  // throws DataError

  const SectionIndex& index() const noexcept { return index_; }
  const std::string& normalization_version() const noexcept { return normalization_version_; }

 private:
  std::vector<PatentDocument> documents_;
  std::unordered_map<std::string, std::size_t> by_id_;
  SectionIndex index_;
  std::string normalization_version_;
};

struct IngestReport {
  std::size_t records = 0;
  std::array<std::size_t, kSectionCount> section_coverage{};  // documents with non-empty section
  std::size_t derived_independent_claims = 0;
};

struct IngestResult {
  Corpus corpus;
  IngestReport report;
};

// Parses the line-delimited JSON corpus format. Blank lines are skipped.
// Errors name the line number and, when known, the record id and field.
IngestResult ingest(std::istream& in);
IngestResult ingest_file(const std::filesystem::path& path);

IngestReport coverage_report(const Corpus& corpus);

// One JSON record per line; only fields present at ingestion are written.
void export_records(const Corpus& corpus, std::ostream& out);

// Sub-corpus of documents with at least one code covered by a query code.
// Throws std::invalid_argument when `codes` is empty.
Corpus filter_by_ipc(const Corpus& corpus, std::span<const IpcCode> codes);

// Persistence directory: corpus.meta, docs.dat, index.dat.
void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);
Corpus load_corpus(const std::filesystem::path& dir);

}  // namespace priorart::corpus
