#include "priorart/evaluation/evaluation.h"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <set>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "priorart/error.h"

namespace priorart::evaluation {
namespace {

std::set<std::string> as_set(std::span<const std::string> ids) { return {ids.begin(), ids.end()}; }

std::size_t count_found(std::span<const std::string> retrieved, const std::set<std::string>& relevant) {
  std::set<std::string> hit;
  for (const auto& id : retrieved) {
    if (relevant.count(id)) hit.insert(id);
  }
  return hit.size();
}

}  // namespace

double recall(std::span<const std::string> retrieved, std::span<const std::string> relevant) {
  const auto rel = as_set(relevant);
  if (rel.empty()) throw std::invalid_argument("recall: no relevant documents");
  return static_cast<double>(count_found(retrieved, rel)) / static_cast<double>(rel.size());
}

std::vector<SweepRow> k_sweep(const corpus::Corpus& candidates, std::span<const graph::RankedPhrase> ranked,
                              std::span<const std::string> relevant, const SweepOptions& options) {
  if (options.k_min == 0 || options.k_min > options.k_max) throw std::invalid_argument("k_sweep: empty k range");
  const auto rel = as_set(relevant);
  std::vector<SweepRow> rows(options.k_max - options.k_min + 1);
  auto run = [&](std::size_t i) {
    const std::size_t k = options.k_min + i;
    auto q = retrieval::formulate_query(ranked, k, options.sections, options.match_mode, options.bounds);
    q.min_phrase_matches = options.min_phrase_matches;
    const auto found = retrieval::search(candidates, q);
    rows[i] = {k, found.size(), count_found(found, rel), rel.size()};
  };
  const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, rows.size());
  if (workers == 1) {
    for (std::size_t i = 0; i < rows.size(); ++i) run(i);
    return rows;
  }
  // Each worker writes its own rows; exceptions are rethrown in k order.
  std::vector<std::exception_ptr> errors(rows.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < rows.size(); i += workers) {
        try {
          run(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

bool retrieved_monotone(std::span<const SweepRow> rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].retrieved < rows[i - 1].retrieved) return false;
  }
  return true;
}

RankPositions rank_positions(std::span<const retrieval::RankedResult> ranked, std::span<const std::string> relevant) {
  RankPositions out;
  const auto rel = as_set(relevant);
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (rel.count(ranked[i].doc_id) && !out.ranks.count(ranked[i].doc_id)) out.ranks[ranked[i].doc_id] = i + 1;
  }
  for (const auto& id : rel) {
    if (!out.ranks.count(id)) out.missing.push_back(id);
  }
  return out;
}

std::optional<std::size_t> full_recall_cutoff(const RankPositions& positions) {
  if (!positions.missing.empty() || positions.ranks.empty()) return std::nullopt;
  std::size_t worst = 0;
  for (const auto& [id, r] : positions.ranks) worst = std::max(worst, r);
  return worst;
}

BaselineList read_baseline(std::istream& in) {
  BaselineList out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  auto fail = [&](const std::string& what) {
    throw DataError("baseline line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t");
    line = line.substr(first, last - first + 1);
    if (!header) {
      if (line.rfind("method=", 0) != 0) fail("expected 'method=<name>' header");
      out.method = line.substr(7);
      if (out.method.empty()) fail("empty method name");
      header = true;
      continue;
    }
    if (line.find_first_of(" \t") != std::string::npos) fail("document id contains whitespace: '" + line + "'");
    if (!seen.insert(line).second) fail("repeated document id '" + line + "'");
    out.doc_ids.push_back(line);
  }
  if (!header) throw DataError("baseline file has no 'method=<name>' header");
  return out;
}

BaselineList read_baseline(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open baseline file " + path.string());
  try {
    return read_baseline(in);
  } catch (const DataError& e) {
    throw DataError(path.filename().string() + ": " + e.what());
  }
}

std::vector<std::pair<std::size_t, double>> recall_at(std::span<const retrieval::RankedResult> ranked,
                                                      std::span<const std::string> relevant,
                                                      std::vector<std::size_t> ns) {
  if (ns.empty()) ns = {10, 100, ranked.size()};
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  std::vector<std::string> ids;
  for (const auto& r : ranked) ids.push_back(r.doc_id);
  std::vector<std::pair<std::size_t, double>> out;
  for (auto n : ns) {
    const auto prefix = std::span<const std::string>(ids).first(std::min(n, ids.size()));
    out.emplace_back(n, recall(prefix, relevant));
  }
  return out;
}

std::vector<ComparisonRow> compare_baselines(const EvaluationReport& ours, std::span<const BaselineList> baselines,
                                             std::span<const std::string> relevant) {
  const auto rel = as_set(relevant);
  if (rel.empty()) throw std::invalid_argument("compare_baselines: no relevant documents");
  const double total = static_cast<double>(rel.size());
  std::vector<ComparisonRow> rows;
  const std::size_t ours_found = ours.positions.ranks.size();
  const std::size_t boundary = ours.full_recall_cutoff.value_or(ours.ranked_size);
  rows.push_back({"ours", boundary, ours_found, rel.size(), static_cast<double>(ours_found) / total, false});
  for (const auto& b : baselines) {
    ComparisonRow row;
    row.method = b.method;
    row.truncated = b.doc_ids.size() > boundary;
    const auto kept = std::span<const std::string>(b.doc_ids).first(std::min(boundary, b.doc_ids.size()));
    row.retrieved = kept.size();
    row.found = count_found(kept, rel);
    row.total = rel.size();
    row.recall = static_cast<double>(row.found) / total;
    rows.push_back(row);
  }
  return rows;
}

EvaluationReport evaluate_ranking(std::string patent_id, std::size_t dataset_size,
                                  std::span<const retrieval::RankedResult> ranked, std::span<const std::string> relevant,
                                  std::vector<std::size_t> recall_ns) {
  if (relevant.empty()) throw std::invalid_argument("evaluate: patent has no examiner citations");
  EvaluationReport r;
  r.patent_id = std::move(patent_id);
  r.dataset_size = dataset_size;
  r.ranked_size = ranked.size();
  r.positions = rank_positions(ranked, relevant);
  r.full_recall_cutoff = full_recall_cutoff(r.positions);
  r.recall_at = recall_at(ranked, relevant, std::move(recall_ns));
  return r;
}

nlohmann::json to_json(const EvaluationReport& report) {
  nlohmann::ordered_json j;
  j["patent_id"] = report.patent_id;
  j["dataset_size"] = report.dataset_size;
  j["per_k"] = nlohmann::ordered_json::array();
  for (const auto& row : report.per_k_rows) {
    j["per_k"].push_back({{"k", row.k}, {"retrieved", row.retrieved}, {"found", row.found}, {"total", row.total}});
  }
  j["retrieved_monotone"] = report.monotone;
  j["ranked_size"] = report.ranked_size;
  j["full_recall_cutoff"] = report.full_recall_cutoff ? nlohmann::ordered_json(*report.full_recall_cutoff) : nlohmann::ordered_json(nullptr);
  j["citation_ranks"] = nlohmann::ordered_json::object();
  for (const auto& [id, rank] : report.positions.ranks) j["citation_ranks"][id] = rank;
  j["missing"] = report.positions.missing;
  j["recall_at"] = nlohmann::ordered_json::array();
  for (const auto& [n, r] : report.recall_at) j["recall_at"].push_back({{"n", n}, {"recall", r}});
  j["comparison"] = nlohmann::ordered_json::array();
  for (const auto& row : report.comparison) {
    j["comparison"].push_back({{"method", row.method},
                               {"retrieved", row.retrieved},
                               {"found", row.found},
                               {"total", row.total},
                               {"recall", row.recall},
                               {"truncated", row.truncated}});
  }
  return nlohmann::json::parse(j.dump());
}

void write_text(const EvaluationReport& report, std::ostream& out) {
  out << fmt::format("Patent {}  |S_d| = {}\n\n", report.patent_id, report.dataset_size);
  if (!report.per_k_rows.empty()) {
    out << fmt::format("{:>4}  {:>10}  {:>10}\n", "k", "|R_sd|", "citations");
    for (const auto& row : report.per_k_rows) {
      out << fmt::format("{:>4}  {:>10}  {:>10}\n", row.k, row.retrieved, fmt::format("{}/{}", row.found, row.total));
    }
    if (!report.monotone) out << "warning: |R_sd| decreases as k grows\n";
    out << '\n';
  }
  out << fmt::format("Ranked documents: {}\n", report.ranked_size);
  out << "Full-recall cutoff: "
      << (report.full_recall_cutoff ? std::to_string(*report.full_recall_cutoff) : std::string("none")) << "\n\n";
  out << fmt::format("{:<24}  {:>6}\n", "citation", "rank");
  std::vector<std::pair<std::size_t, std::string>> by_rank;
  for (const auto& [id, rank] : report.positions.ranks) by_rank.emplace_back(rank, id);
  std::sort(by_rank.begin(), by_rank.end());
  for (const auto& [rank, id] : by_rank) out << fmt::format("{:<24}  {:>6}\n", id, rank);
  for (const auto& id : report.positions.missing) out << fmt::format("{:<24}  {:>6}\n", id, "-");
  out << '\n';
  for (const auto& [n, r] : report.recall_at) out << fmt::format("recall@{} = {:.4f}\n", n, r);
  if (!report.comparison.empty()) {
    out << '\n' << fmt::format("{:<16}  {:>9}  {:>9}  {:>7}\n", "method", "retrieved", "found", "recall");
    for (const auto& row : report.comparison) {
      out << fmt::format("{:<16}  {:>9}  {:>9}  {:>6.2f}%{}\n", row.method, row.retrieved,
                         fmt::format("{}/{}", row.found, row.total), 100 * row.recall, row.truncated ? " (cut)" : "");
    }
  }
}

}  // namespace priorart::evaluation
