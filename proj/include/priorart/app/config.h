#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "priorart/embedding/provider.h"
#include "priorart/graph/phrase_graph.h"
#include "priorart/ipc/descriptions.h"
#include "priorart/keyphrase/yake.h"
#include "priorart/retrieval/query.h"
#include "priorart/retrieval/search.h"

namespace priorart::app {

inline embedding::ProviderConfig hash_provider(std::size_t dim) {
  embedding::ProviderConfig p;
  p.dim = dim;
  return p;
}

// Every free parameter of a run. A config naming only the corpus and the IPC
// table is complete; everything else has a default.
struct RunConfig {
  std::filesystem::path corpus;     // corpus directory or JSONL file
  std::filesystem::path ipc_table;  // empty means the bundled table

  embedding::ProviderConfig phase1_provider = hash_provider(384);
  embedding::ProviderConfig phase3_provider = hash_provider(768);

  ipc::SubgroupExpansion subgroups = ipc::SubgroupExpansion::siblings;
  keyphrase::ExtractOptions keyphrases;
  double sentence_threshold = 0.5;

  graph::GraphOptions graph;  // min_cluster_size, edge threshold, alphas, weights, pagerank

  std::size_t k = 16;
  retrieval::KBounds k_bounds;
  std::vector<corpus::Section> sections{corpus::kAllSections.begin(), corpus::kAllSections.end()};
  retrieval::MatchMode match_mode = retrieval::MatchMode::exact_phrase;
  std::size_t min_phrase_matches = 1;

  retrieval::RankOptions ranking;  // tau_match, lambda

  std::vector<std::size_t> recall_at;               // empty: {10, 100, |ranked|}
  std::vector<std::filesystem::path> baselines;     // external result lists for the report

  std::uint64_t seed = 0;  // seeds both hash providers
  std::size_t workers = 1;
};

// Range and consistency checks, including alpha + beta + delta <= 1.
// Throws ConfigError.
void validate(const RunConfig& config);

// Unknown keys are rejected so that typos do not silently fall back to
// defaults. Relative paths are resolved against `base_dir`.
RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

// Complete config with every field spelled out; config_from_json(to_json(c))
// reproduces c.
nlohmann::json to_json(const RunConfig& config);

// The IPC table bundled with the sources.
std::filesystem::path default_ipc_table();

}  // namespace priorart::app
