#include "priorart/corpus/corpus.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "priorart/corpus/normalize.h"
#include "priorart/error.h"

namespace priorart::corpus {
namespace {

using nlohmann::json;

constexpr std::string_view kIndexMagic = "priorart-index 1";
constexpr int kFormatVersion = 1;

std::vector<std::uint32_t> unique_docs(const std::vector<Posting>& postings) {
  std::vector<std::uint32_t> docs;
  for (const auto& p : postings) {
    if (docs.empty() || docs.back() != p.doc) docs.push_back(p.doc);
  }
  return docs;
}

std::string record_context(std::size_t line, const std::string& id) {
  std::string ctx = "line " + std::to_string(line);
  if (!id.empty()) ctx += " (record " + id + ")";
  return ctx;
}

std::vector<std::string> string_array(const json& rec, const char* field, std::size_t line, const std::string& id) {
  const auto& value = rec.at(field);
  if (!value.is_array()) throw DataError(record_context(line, id) + ": field '" + field + "' must be an array");
  std::vector<std::string> out;
  for (const auto& item : value) {
    if (!item.is_string()) {
      throw DataError(record_context(line, id) + ": field '" + field + "' must contain only strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

PatentDocument parse_record(const json& rec, std::size_t line) {
  if (!rec.is_object()) throw DataError(record_context(line, "") + ": record is not a JSON object");
  PatentDocument doc;
  if (!rec.contains("id") || !rec["id"].is_string() || rec["id"].get<std::string>().empty()) {
    throw DataError(record_context(line, "") + ": field 'id' missing or not a non-empty string");
  }
  doc.id = rec["id"].get<std::string>();

  auto optional_text = [&](const char* field, std::string& target, bool& present) {
    if (!rec.contains(field)) return;
    if (!rec[field].is_string()) throw DataError(record_context(line, doc.id) + ": field '" + field + "' must be a string");
    target = rec[field].get<std::string>();
    present = true;
  };
  optional_text("title", doc.title, doc.has_title);
  optional_text("abstract", doc.abstract, doc.has_abstract);

  for (const char* required : {"claims", "ipc_codes"}) {
    if (!rec.contains(required)) throw DataError(record_context(line, doc.id) + ": field '" + required + "' missing");
  }
  doc.claims = string_array(rec, "claims", line, doc.id);
  for (const auto& code : string_array(rec, "ipc_codes", line, doc.id)) {
    auto parsed = IpcCode::try_parse(code);
    if (!parsed) throw DataError(record_context(line, doc.id) + ": field 'ipc_codes' has invalid code '" + code + "'");
    doc.ipc_codes.push_back(*std::move(parsed));
  }
  if (rec.contains("independent_claims")) {
    doc.independent_claims = string_array(rec, "independent_claims", line, doc.id);
    doc.has_independent_claims = true;
  } else {
    doc.independent_claims = derive_independent_claims(doc.claims);
  }
  if (rec.contains("cited_by_examiner")) {
    doc.cited_by_examiner = string_array(rec, "cited_by_examiner", line, doc.id);
    doc.has_citations = true;
  }
  try {
    validate(doc);
  } catch (const DataError& e) {
    throw DataError(record_context(line, doc.id) + ": " + e.what());
  }
  return doc;
}

json to_record(const PatentDocument& doc) {
  json rec = json::object();
  rec["id"] = doc.id;
  if (doc.has_title) rec["title"] = doc.title;
  if (doc.has_abstract) rec["abstract"] = doc.abstract;
  rec["claims"] = doc.claims;
  if (doc.has_independent_claims) rec["independent_claims"] = doc.independent_claims;
  json codes = json::array();
  for (const auto& c : doc.ipc_codes) codes.push_back(c.str());
  rec["ipc_codes"] = std::move(codes);
  if (doc.has_citations) rec["cited_by_examiner"] = doc.cited_by_examiner;
  return rec;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

}  // namespace

std::vector<std::string> index_tokens(std::string_view text) { return normalize_tokens(text, true); }

SectionIndex SectionIndex::build(std::span<const PatentDocument> documents) {
  SectionIndex index;
  for (std::size_t d = 0; d < documents.size(); ++d) {
    for (Section s : kAllSections) {
      const auto tokens = index_tokens(section_text(documents[d], s));
      auto& map = index.sections_[static_cast<std::size_t>(s)];
      for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
        map[tokens[pos]].push_back({static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(pos)});
      }
    }
  }
  return index;
}

const std::vector<Posting>* SectionIndex::find(Section section, std::string_view token) const {
  const auto& map = postings(section);
  auto it = map.find(token);
  return it == map.end() ? nullptr : &it->second;
}

std::vector<std::uint32_t> SectionIndex::docs_with_phrase(Section section, std::span<const std::string> tokens) const {
  std::vector<std::uint32_t> docs;
  if (tokens.empty()) return docs;
  std::vector<const std::vector<Posting>*> lists;
  for (const auto& t : tokens) {
    const auto* list = find(section, t);
    if (list == nullptr) return docs;
    lists.push_back(list);
  }
  for (const Posting& start : *lists[0]) {
    if (!docs.empty() && docs.back() == start.doc) continue;
    bool match = true;
    for (std::size_t i = 1; i < lists.size() && match; ++i) {
      const Posting want{start.doc, start.position + static_cast<std::uint32_t>(i)};
      match = std::binary_search(lists[i]->begin(), lists[i]->end(), want);
    }
    if (match) docs.push_back(start.doc);
  }
  return docs;
}

std::vector<std::uint32_t> SectionIndex::docs_with_all_tokens(Section section,
                                                              std::span<const std::string> tokens) const {
  std::vector<std::uint32_t> docs;
  if (tokens.empty()) return docs;
  bool first = true;
  for (const auto& t : tokens) {
    const auto* list = find(section, t);
    if (list == nullptr) return {};
    auto these = unique_docs(*list);
    if (first) {
      docs = std::move(these);
      first = false;
    } else {
      std::vector<std::uint32_t> both;
      std::set_intersection(docs.begin(), docs.end(), these.begin(), these.end(), std::back_inserter(both));
      docs = std::move(both);
    }
    if (docs.empty()) break;
  }
  return docs;
}

void SectionIndex::write(std::ostream& out) const {
  out << kIndexMagic << '\n';
  for (Section s : kAllSections) {
    const auto& map = postings(s);
    out << "section " << to_string(s) << ' ' << map.size() << '\n';
    for (const auto& [token, list] : map) {
      out << token << '\t';
      for (std::size_t i = 0; i < list.size(); ++i) {
        if (i > 0) out << ' ';
        out << list[i].doc << ':' << list[i].position;
      }
      out << '\n';
    }
  }
}

SectionIndex SectionIndex::read(std::istream& in) {
  SectionIndex index;
  std::string line;
  if (!std::getline(in, line) || line != kIndexMagic) throw DataError("index.dat: bad header");
  for (Section s : kAllSections) {
    if (!std::getline(in, line)) throw DataError("index.dat: truncated");
    std::istringstream head(line);
    std::string word, name;
    std::size_t count = 0;
    if (!(head >> word >> name >> count) || word != "section" || name != to_string(s)) {
      throw DataError("index.dat: expected section " + std::string(to_string(s)));
    }
    auto& map = index.sections_[static_cast<std::size_t>(s)];
    for (std::size_t i = 0; i < count; ++i) {
      if (!std::getline(in, line)) throw DataError("index.dat: truncated");
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw DataError("index.dat: malformed posting line");
      auto& list = map[line.substr(0, tab)];
      std::istringstream rest(line.substr(tab + 1));
      std::string item;
      while (rest >> item) {
        const auto colon = item.find(':');
        Posting p;
        if (colon == std::string::npos ||
            std::from_chars(item.data(), item.data() + colon, p.doc).ec != std::errc{} ||
            std::from_chars(item.data() + colon + 1, item.data() + item.size(), p.position).ec != std::errc{}) {
          throw DataError("index.dat: malformed posting '" + item + "'");
        }
        list.push_back(p);
      }
    }
  }
  return index;
}

Corpus Corpus::from_documents(std::vector<PatentDocument> documents) {
  Corpus corpus;
  corpus.by_id_.reserve(documents.size());
  for (std::size_t i = 0; i < documents.size(); ++i) {
    validate(documents[i]);
    if (!corpus.by_id_.emplace(documents[i].id, i).second) {
      throw DataError("duplicate document id '" + documents[i].id + "'");
    }
  }
  corpus.documents_ = std::move(documents);
  corpus.index_ = SectionIndex::build(corpus.documents_);
  corpus.normalization_version_ = std::string(kNormalizationVersion);
  return corpus;
}

const PatentDocument* Corpus::find(std::string_view id) const noexcept {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &documents_[it->second];
}

const PatentDocument& Corpus::at(std::string_view id) const {
  const auto* doc = find(id);
  if (doc == nullptr) throw DataError("unknown document id '" + std::string(id) + "'");
  return *doc;
}

IngestResult ingest(std::istream& in) {
  std::vector<PatentDocument> docs;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(record_context(line_no, "") + ": malformed JSON: " + e.what());
    }
    auto doc = parse_record(rec, line_no);
    if (auto [it, inserted] = seen.emplace(doc.id, line_no); !inserted) {
      throw DataError("duplicate document id '" + doc.id + "' (lines " + std::to_string(it->second) + " and " +
                      std::to_string(line_no) + ")");
    }
    docs.push_back(std::move(doc));
  }
  IngestResult result{Corpus::from_documents(std::move(docs)), {}};
  result.report = coverage_report(result.corpus);
  return result;
}

IngestResult ingest_file(const std::filesystem::path& path) {
  auto in = open_in(path);
  return ingest(in);
}

IngestReport coverage_report(const Corpus& corpus) {
  IngestReport report;
  report.records = corpus.size();
  for (const auto& doc : corpus.documents()) {
    for (Section s : kAllSections) {
      if (!section_text(doc, s).empty()) ++report.section_coverage[static_cast<std::size_t>(s)];
    }
    if (!doc.has_independent_claims) ++report.derived_independent_claims;
  }
  return report;
}

void export_records(const Corpus& corpus, std::ostream& out) {
  for (const auto& doc : corpus.documents()) out << to_record(doc).dump() << '\n';
}

Corpus filter_by_ipc(const Corpus& corpus, std::span<const IpcCode> codes) {
  if (codes.empty()) throw std::invalid_argument("filter_by_ipc: empty code list");
  std::vector<PatentDocument> kept;
  for (const auto& doc : corpus.documents()) {
    const bool match = std::any_of(doc.ipc_codes.begin(), doc.ipc_codes.end(), [&](const IpcCode& have) {
      return std::any_of(codes.begin(), codes.end(), [&](const IpcCode& q) { return q.covers(have); });
    });
    if (match) kept.push_back(doc);
  }
  return Corpus::from_documents(std::move(kept));
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto report = coverage_report(corpus);
  json meta;
  meta["format"] = "priorart-corpus";
  meta["format_version"] = kFormatVersion;
  meta["normalization_version"] = corpus.normalization_version();
  meta["documents"] = corpus.size();
  json coverage = json::object();
  for (Section s : kAllSections) coverage[std::string(to_string(s))] = report.section_coverage[static_cast<std::size_t>(s)];
  meta["section_coverage"] = std::move(coverage);
  {
    auto out = open_out(dir / "corpus.meta");
    out << meta.dump(2) << '\n';
  }
  {
    auto out = open_out(dir / "docs.dat");
    export_records(corpus, out);
  }
  auto out = open_out(dir / "index.dat");
  corpus.index().write(out);
}

Corpus load_corpus(const std::filesystem::path& dir) {
  json meta;
  {
    auto in = open_in(dir / "corpus.meta");
    try {
      meta = json::parse(in);
    } catch (const json::exception& e) {
      throw DataError("corpus.meta: " + std::string(e.what()));
    }
  }
  if (meta.value("format", "") != "priorart-corpus" || meta.value("format_version", 0) != kFormatVersion) {
    throw DataError("corpus.meta: unsupported format");
  }
  const auto version = meta.value("normalization_version", "");
  if (version != kNormalizationVersion) {
    throw DataError("corpus.meta: normalization_version '" + version + "' does not match this build ('" +
                    std::string(kNormalizationVersion) + "'); re-ingest the corpus");
  }
  auto docs_in = open_in(dir / "docs.dat");
  auto result = ingest(docs_in);
  if (meta.value("documents", std::size_t{0}) != result.corpus.size()) {
    throw DataError("corpus.meta: document count does not match docs.dat");
  }
  auto index_in = open_in(dir / "index.dat");
  if (!(SectionIndex::read(index_in) == result.corpus.index())) {
    throw DataError("index.dat is inconsistent with docs.dat; re-ingest the corpus");
  }
  return std::move(result.corpus);
}

}  // namespace priorart::corpus
