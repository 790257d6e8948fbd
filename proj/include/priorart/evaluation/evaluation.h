#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "priorart/corpus/corpus.h"
#include "priorart/graph/phrase_graph.h"
#include "priorart/retrieval/query.h"
#include "priorart/retrieval/search.h"

namespace priorart::evaluation {

// |retrieved ∩ relevant| / |relevant|. Duplicates are ignored.
// Throws std::invalid_argument when relevant is empty.
double recall(std::span<const std::string> retrieved, std::span<const std::string> relevant);

struct SweepRow {
  std::size_t k = 0;
  std::size_t retrieved = 0;  // |R_sd|
  std::size_t found = 0;      // relevant documents among them
  std::size_t total = 0;      // |relevant|

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct SweepOptions {
  std::size_t k_min = 12;
  std::size_t k_max = 16;
  std::vector<corpus::Section> sections{corpus::kAllSections.begin(), corpus::kAllSections.end()};
  retrieval::MatchMode match_mode = retrieval::MatchMode::exact_phrase;
  std::size_t min_phrase_matches = 1;
  retrieval::KBounds bounds;
  std::size_t workers = 1;
};

// One formulate_query + search per k in [k_min, k_max], in k order.
std::vector<SweepRow> k_sweep(const corpus::Corpus& candidates, std::span<const graph::RankedPhrase> ranked,
                              std::span<const std::string> relevant, const SweepOptions& options);

// True when |R_sd| never shrinks as k grows.
bool retrieved_monotone(std::span<const SweepRow> rows);

struct RankPositions {
  std::map<std::string, std::size_t> ranks;  // relevant id -> 1-based position
  std::vector<std::string> missing;          // relevant ids not in the ranked list, sorted
};

RankPositions rank_positions(std::span<const retrieval::RankedResult> ranked, std::span<const std::string> relevant);

// Largest citation rank when every relevant id was ranked, else nothing.
std::optional<std::size_t> full_recall_cutoff(const RankPositions& positions);

struct BaselineList {
  std::string method;
  std::vector<std::string> doc_ids;  // rank order
};

// Header `method=<name>`, then one id per line. Blank lines are skipped.
// Throws DataError naming the line for a missing header, an empty method
// name, an id containing whitespace or a repeated id.
BaselineList read_baseline(std::istream& in);
BaselineList read_baseline(const std::filesystem::path& path);

struct ComparisonRow {
  std::string method;
  std::size_t retrieved = 0;
  std::size_t found = 0;
  std::size_t total = 0;
  double recall = 0;
  bool truncated = false;

  friend bool operator==(const ComparisonRow&, const ComparisonRow&) = default;
};

struct EvaluationReport {
  std::string patent_id;
  std::size_t dataset_size = 0;  // |S_d|
  std::vector<SweepRow> per_k_rows;
  bool monotone = true;
  std::size_t ranked_size = 0;
  std::optional<std::size_t> full_recall_cutoff;
  RankPositions positions;
  std::vector<std::pair<std::size_t, double>> recall_at;  // ascending n
  std::vector<ComparisonRow> comparison;                  // ours first
};

// recall over the first n ranked ids for each n (sorted, duplicates
// dropped). Defaults to {10, 100, |ranked|}.
std::vector<std::pair<std::size_t, double>> recall_at(std::span<const retrieval::RankedResult> ranked,
                                                      std::span<const std::string> relevant,
                                                      std::vector<std::size_t> ns = {});

// Baselines are cut at our full-recall cutoff (or at our ranked-list length
// when some citation was missed) before counting.
std::vector<ComparisonRow> compare_baselines(const EvaluationReport& ours, std::span<const BaselineList> baselines,
                                             std::span<const std::string> relevant);

// Assembles everything except per_k_rows/monotone and comparison.
EvaluationReport evaluate_ranking(std::string patent_id, std::size_t dataset_size,
                                  std::span<const retrieval::RankedResult> ranked, std::span<const std::string> relevant,
                                  std::vector<std::size_t> recall_ns = {});

nlohmann::json to_json(const EvaluationReport& report);
// Aligned text tables: k sweep, full-recall summary, citation ranks,
// comparison.
void write_text(const EvaluationReport& report, std::ostream& out);

}  // namespace priorart::evaluation
