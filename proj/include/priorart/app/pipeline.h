#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "priorart/app/config.h"
#include "priorart/corpus/corpus.h"
#include "priorart/error.h"
#include "priorart/evaluation/evaluation.h"
#include "priorart/graph/phrase_graph.h"
#include "priorart/ipc/descriptions.h"
#include "priorart/keyphrase/yake.h"
#include "priorart/retrieval/report.h"
#include "priorart/text/sentences.h"

namespace priorart::app {

// Stage artifacts in dependency order; each stage needs the one before it.
enum class Stage { keyphrases, sentences, phrases, query, retrieve, rank, report };

inline constexpr std::array<Stage, 7> kAllStages = {Stage::keyphrases, Stage::sentences, Stage::phrases,
                                                    Stage::query,      Stage::retrieve,  Stage::rank,
                                                    Stage::report};

std::string_view to_string(Stage stage) noexcept;
std::optional<Stage> parse_stage(std::string_view name);
std::optional<Stage> upstream(Stage stage) noexcept;
// File name of the stage artifact inside a session directory.
std::string_view artifact_file(Stage stage) noexcept;

// A request that does not fit the current state of a session: a stage run
// without its upstream artifact, or a second run of a finished stage.
class ConflictError : public Error {
 public:
  using Error::Error;
};

struct KeyphraseArtifact {
  std::string patent_id;
  std::vector<ipc::Description> descriptions;  // aggregated IPC descriptions
  std::vector<corpus::IpcCode> missing;        // patent codes absent from the table
  std::vector<keyphrase::KeyPhrase> keyphrases;
};

struct ReportArtifact {
  nlohmann::json json;  // machine form
  std::string text;     // aligned tables
};

struct PhraseArtifact {
  graph::PhraseGraph graph;
  std::vector<graph::RankedPhrase> ranked;
};

// JSON forms of the artifacts. The readers accept exactly what the writers
// produce and throw DataError otherwise.
nlohmann::json to_json(const KeyphraseArtifact& a);
KeyphraseArtifact keyphrases_from_json(const nlohmann::json& j);
nlohmann::json to_json(const text::SentenceSet& s);
text::SentenceSet sentences_from_json(const nlohmann::json& j);
nlohmann::json to_json(std::span<const graph::RankedPhrase> ranked);
std::vector<graph::RankedPhrase> ranked_phrases_from_json(const nlohmann::json& j);
nlohmann::json to_json(const retrieval::RetrievalReport& r);
nlohmann::json to_json(const retrieval::RankingReport& r);

// Loads the corpus (a saved directory or a JSONL file), the IPC table and
// both embedding providers once; the stage methods are const and may be
// called from several threads.
//
// Every stage method wraps failures in StageError naming the stage, except
// that a patent with no IPC table coverage fails as stage "ipc-knowledge".
class Pipeline {
 public:
  explicit Pipeline(RunConfig config);
  Pipeline(RunConfig config, corpus::Corpus corpus, ipc::DescriptionSet table);
  ~Pipeline();

  const RunConfig& config() const noexcept { return config_; }
  const corpus::Corpus& corpus() const noexcept { return corpus_; }
  const ipc::DescriptionSet& table() const noexcept { return table_; }
  const embedding::EmbeddingProvider& phase1() const noexcept { return *phase1_; }
  const embedding::EmbeddingProvider& phase3() const noexcept { return *phase3_; }

  const corpus::PatentDocument& patent(std::string_view id) const;  // DataError when unknown

  // S_d: documents sharing an IPC code with the patent, the patent excluded.
  corpus::Corpus candidates(const corpus::PatentDocument& patent) const;

  KeyphraseArtifact keyphrases(const corpus::PatentDocument& patent) const;
  text::SentenceSet sentences(const corpus::PatentDocument& patent,
                              std::span<const keyphrase::KeyPhrase> keyphrases) const;
  PhraseArtifact phrases(const text::SentenceSet& sentences) const;
  // Deterministic top-k formulation; k defaults to the configured k.
  retrieval::StructuredQuery query(std::span<const graph::RankedPhrase> ranked,
                                   std::optional<std::size_t> k = std::nullopt) const;
  retrieval::RetrievalReport retrieve(const corpus::PatentDocument& patent,
                                      const retrieval::StructuredQuery& query) const;
  // Never drops a document; an empty retrieval gives an empty ranking.
  retrieval::RankingReport rank(const retrieval::RetrievalReport& retrieved) const;
  // Evaluation summary. The evaluation part is null when the patent has no
  // examiner citations.
  ReportArtifact report(const corpus::PatentDocument& patent, std::span<const graph::RankedPhrase> ranked,
                        const retrieval::RankingReport& ranking) const;
  // The EvaluationReport behind report(); throws when there are no citations.
  evaluation::EvaluationReport evaluate(const corpus::PatentDocument& patent,
                                        std::span<const graph::RankedPhrase> ranked,
                                        const retrieval::RankingReport& ranking) const;

 private:
  RunConfig config_;
  corpus::Corpus corpus_;
  ipc::DescriptionSet table_;
  std::unique_ptr<embedding::EmbeddingProvider> phase1_;
  std::unique_ptr<embedding::EmbeddingProvider> phase3_;
};

// Opens a corpus directory written by save_corpus, or ingests a JSONL file.
corpus::Corpus open_corpus(const std::filesystem::path& path);

}  // namespace priorart::app
