#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "priorart/app/config.h"
#include "priorart/app/pipeline.h"
#include "priorart/retrieval/query.h"

namespace priorart::app {

// One pipeline run on disk:
//
//   session.json        id and patent
//   config.json         the RunConfig the artifacts were produced with
//   audit.jsonl         one JSON object per event, numbered from 1
//   <artifact files>    see artifact_file(); written once, never modified
//   graph.json          phrase graph dump (written with the phrases stage)
//   report.txt          text form of the report
//   history/<n>/        query and downstream artifacts replaced by an edit
//   annotations.json    examiner relevance labels per document (mutable)
//
// A Session object holds no state beyond its directory, so several objects
// (or processes) can look at the same session; callers serialize writers.
class Session {
 public:
  // Throws ConflictError when the directory already holds a session.
  static Session create(const std::filesystem::path& dir, std::string id, std::string patent_id,
                        const RunConfig& config);
  // Throws DataError when the directory is not a session.
  static Session open(const std::filesystem::path& dir);

  const std::string& id() const noexcept { return id_; }
  const std::string& patent_id() const noexcept { return patent_id_; }
  const std::filesystem::path& dir() const noexcept { return dir_; }

  RunConfig config() const;

  bool has(Stage stage) const;
  std::filesystem::path path(Stage stage) const { return dir_ / artifact_file(stage); }
  std::string read(Stage stage) const;  // ConflictError when missing
  std::vector<Stage> completed() const;

  void append_audit(nlohmann::json event) const;
  std::vector<nlohmann::json> audit() const;
  std::size_t history_size() const;
  // Artifact `stage` of history/<n>/; ConflictError when there is none.
  std::string read_history(std::size_t n, Stage stage) const;

  // Relevance labels: "relevant", "not_relevant" or "unsure". They are not
  // stage artifacts, so they survive query edits and are not replayed.
  // An empty label removes the entry. Each change is audited.
  nlohmann::json annotations() const;
  void annotate(const std::string& doc_id, const std::string& label) const;

 private:
  Session(std::filesystem::path dir, std::string id, std::string patent_id)
      : dir_(std::move(dir)), id_(std::move(id)), patent_id_(std::move(patent_id)) {}

  friend class Runner;

  // Fails with ConflictError if the artifact exists; writes via a temporary.
  void write(Stage stage, const std::string& bytes) const;
  void write_aux(const std::string& name, const std::string& bytes) const;
  // Moves the query and everything downstream into history/<n>/.
  void archive_query() const;

  std::filesystem::path dir_;
  std::string id_;
  std::string patent_id_;
};

// Advances sessions through the stage DAG using a shared Pipeline.
class Runner {
 public:
  explicit Runner(const Pipeline& pipeline) : pipeline_(pipeline) {}

  // Runs one stage from the upstream artifact on disk. Throws ConflictError
  // when the upstream artifact is missing or the stage already ran, and
  // StageError when the stage itself fails (recorded in the audit log).
  // `k` only applies to the query stage.
  void run(const Session& session, Stage stage, std::optional<std::size_t> k = std::nullopt) const;

  // Replaces the query with an edited one (provenance human_edited). Needs
  // the phrases artifact. The previous query and its downstream artifacts
  // move to history/; the audit log records both phrase lists.
  void edit_query(const Session& session, retrieval::StructuredQuery edited) const;

  // Creates the session and runs every stage in order. On failure the
  // partial session stays on disk and the StageError propagates.
  Session run_all(const std::filesystem::path& dir, const std::string& patent_id) const;

 private:
  const Pipeline& pipeline_;
};

// Re-runs a finished session from its config.json into `scratch` (a human
// edited query is re-applied as an edit) and returns the stages whose
// artifacts differ byte-wise. Empty means the session replays exactly.
std::vector<Stage> replay(const std::filesystem::path& session_dir, const std::filesystem::path& scratch);

}  // namespace priorart::app
