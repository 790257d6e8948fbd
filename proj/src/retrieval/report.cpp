#include "priorart/retrieval/report.h"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "priorart/error.h"

namespace priorart::retrieval {
namespace {

constexpr std::string_view kResultsMagic = "priorart-results 1";
constexpr std::string_view kRankingMagic = "priorart-ranking 1";

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out += s[i];
      continue;
    }
    const char n = s[++i];
    out += n == 't' ? '\t' : n == 'n' ? '\n' : n == 'r' ? '\r' : n;
  }
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

std::string real(double x) { return fmt::format("{:.17g}", x); }

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      fields = split_tabs(line);
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError("report line " + std::to_string(line_no_) + ": " + what);
  }

  std::size_t line() const noexcept { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

double parse_real(const LineReader& r, const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) r.fail("bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    r.fail("bad number '" + s + "'");
  }
}

std::size_t parse_count(const LineReader& r, const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) r.fail("bad count '" + s + "'");
  return std::stoul(s);
}

// Reads the magic, patent and query lines common to both reports.
void read_header(LineReader& r, std::string_view magic, std::string& patent, StructuredQuery& query) {
  std::vector<std::string> f;
  if (!r.next(f) || f.size() != 1 || f[0] != magic) r.fail("expected '" + std::string(magic) + "'");
  if (!r.next(f) || f.size() != 2 || f[0] != "patent") r.fail("expected patent line");
  patent = unescape(f[1]);
  if (!r.next(f) || f.size() != 2 || f[0] != "query") r.fail("expected query line");
  try {
    query = query_from_json(nlohmann::json::parse(f[1]));
  } catch (const nlohmann::json::exception& e) {
    r.fail(std::string("bad query JSON: ") + e.what());
  } catch (const DataError& e) {
    r.fail(e.what());
  }
}

void write_header(std::ostream& out, std::string_view magic, const std::string& patent, const StructuredQuery& q) {
  out << magic << '\n' << "patent\t" << escape(patent) << '\n' << "query\t" << to_json(q).dump() << '\n';
}

}  // namespace

void write_report(const RetrievalReport& report, std::ostream& out) {
  write_header(out, kResultsMagic, report.patent_id, report.query);
  for (const auto& id : report.doc_ids) out << "doc\t" << escape(id) << '\n';
}

void write_report(const RankingReport& report, std::ostream& out) {
  write_header(out, kRankingMagic, report.patent_id, report.query);
  for (const auto& r : report.results) {
    out << "result\t" << r.rank << '\t' << escape(r.doc_id) << '\t' << r.match_count << '\t' << real(r.weighted) << '\t'
        << real(r.final_score) << '\t' << to_string(r.source) << '\n';
    for (const auto& m : r.matches) out << "match\t" << escape(m.phrase) << '\t' << real(m.cosine) << '\n';
  }
}

RetrievalReport read_retrieval_report(std::istream& in) {
  LineReader r(in);
  RetrievalReport report;
  read_header(r, kResultsMagic, report.patent_id, report.query);
  std::vector<std::string> f;
  while (r.next(f)) {
    if (f.size() != 2 || f[0] != "doc") r.fail("expected doc line");
    report.doc_ids.push_back(unescape(f[1]));
  }
  return report;
}

RankingReport read_ranking_report(std::istream& in) {
  LineReader r(in);
  RankingReport report;
  read_header(r, kRankingMagic, report.patent_id, report.query);
  std::vector<std::string> f;
  while (r.next(f)) {
    if (f[0] == "result" && f.size() == 7) {
      RankedResult res;
      res.rank = parse_count(r, f[1]);
      res.doc_id = unescape(f[2]);
      res.match_count = parse_count(r, f[3]);
      res.weighted = parse_real(r, f[4]);
      res.final_score = parse_real(r, f[5]);
      try {
        res.source = parse_scoring_source(f[6]);
      } catch (const DataError& e) {
        r.fail(e.what());
      }
      report.results.push_back(std::move(res));
    } else if (f[0] == "match" && f.size() == 3) {
      if (report.results.empty()) r.fail("match line before any result");
      report.results.back().matches.push_back({unescape(f[1]), parse_real(r, f[2])});
    } else {
      r.fail("expected result or match line");
    }
  }
  for (const auto& res : report.results) {
    if (res.matches.size() != res.match_count) {
      throw DataError("report: result " + res.doc_id + " lists " + std::to_string(res.matches.size()) +
                      " matches but a count of " + std::to_string(res.match_count));
    }
  }
  return report;
}

RetrievalReport read_retrieval_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_retrieval_report(in);
}

RankingReport read_ranking_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_ranking_report(in);
}

}  // namespace priorart::retrieval
