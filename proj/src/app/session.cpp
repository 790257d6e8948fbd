#include "priorart/app/session.h"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "priorart/error.h"
#include "priorart/retrieval/report.h"

namespace priorart::app {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << bytes;
    if (!out.flush()) throw DataError("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string pretty(const json& j) { return j.dump(2) + "\n"; }

json parse_artifact(const std::string& bytes, Stage stage) {
  try {
    return json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("artifact ") + std::string(artifact_file(stage)) + " is not JSON: " + e.what());
  }
}

// Configuration values that feed the given stage, for the audit log.
json stage_parameters(const RunConfig& config, Stage stage) {
  const json c = to_json(config);
  switch (stage) {
    case Stage::keyphrases:
      return {{"ipc_table", c["ipc_table"]}, {"keyphrase", c["keyphrase"]}};
    case Stage::sentences:
      return {{"sentence_threshold", c["sentence_threshold"]}, {"phase1_provider", c["phase1_provider"]},
              {"seed", c["seed"]}};
    case Stage::phrases:
      return {{"graph", c["graph"]}, {"phase1_provider", c["phase1_provider"]}, {"seed", c["seed"]}};
    case Stage::query:
    case Stage::retrieve:
      return {{"query", c["query"]}};
    case Stage::rank:
      return {{"ranking", c["ranking"]}, {"phase3_provider", c["phase3_provider"]}, {"seed", c["seed"]}};
    case Stage::report:
      return {{"evaluation", c["evaluation"]}, {"query", c["query"]}};
  }
  return json::object();
}

}  // namespace

Session Session::create(const fs::path& dir, std::string id, std::string patent_id, const RunConfig& config) {
  if (fs::exists(dir / "session.json")) throw ConflictError("a session already exists in " + dir.string());
  fs::create_directories(dir);
  Session s(dir, std::move(id), std::move(patent_id));
  write_file(dir / "session.json", pretty({{"id", s.id_}, {"patent_id", s.patent_id_}}));
  write_file(dir / "config.json", pretty(to_json(config)));
  s.append_audit({{"event", "created"}, {"patent_id", s.patent_id_}});
  return s;
}

Session Session::open(const fs::path& dir) {
  const auto path = dir / "session.json";
  if (!fs::exists(path)) throw DataError("not a session directory: " + dir.string());
  try {
    const auto j = json::parse(slurp(path));
    return Session(dir, j.at("id").get<std::string>(), j.at("patent_id").get<std::string>());
  } catch (const json::exception& e) {
    throw DataError("malformed " + path.string() + ": " + e.what());
  }
}

RunConfig Session::config() const {
  try {
    return config_from_json(json::parse(slurp(dir_ / "config.json")));
  } catch (const json::parse_error& e) {
    throw DataError("malformed session config: " + std::string(e.what()));
  }
}

bool Session::has(Stage stage) const { return fs::exists(path(stage)); }

std::string Session::read(Stage stage) const {
  if (!has(stage)) {
    throw ConflictError("session " + id_ + " has no " + std::string(to_string(stage)) + " artifact yet");
  }
  return slurp(path(stage));
}

std::vector<Stage> Session::completed() const {
  std::vector<Stage> out;
  for (auto s : kAllStages) {
    if (has(s)) out.push_back(s);
  }
  return out;
}

void Session::append_audit(json event) const {
  event["seq"] = audit().size() + 1;
  std::ofstream out(dir_ / "audit.jsonl", std::ios::binary | std::ios::app);
  if (!out) throw DataError("cannot append to the audit log of session " + id_);
  out << event.dump() << '\n';
}

std::vector<json> Session::audit() const {
  std::vector<json> out;
  std::ifstream in(dir_ / "audit.jsonl", std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

std::size_t Session::history_size() const {
  const auto root = dir_ / "history";
  if (!fs::exists(root)) return 0;
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(root)) n += entry.is_directory();
  return n;
}

std::string Session::read_history(std::size_t n, Stage stage) const {
  const auto p = dir_ / "history" / std::to_string(n) / artifact_file(stage);
  if (n == 0 || !fs::exists(p)) {
    throw ConflictError(fmt::format("session {} has no {} artifact in history entry {}", id_, to_string(stage), n));
  }
  return slurp(p);
}

json Session::annotations() const {
  const auto p = dir_ / "annotations.json";
  if (!fs::exists(p)) return json::object();
  try {
    return json::parse(slurp(p));
  } catch (const json::parse_error& e) {
    throw DataError("malformed annotations in session " + id_ + ": " + e.what());
  }
}

void Session::annotate(const std::string& doc_id, const std::string& label) const {
  if (!label.empty() && label != "relevant" && label != "not_relevant" && label != "unsure") {
    throw DataError("unknown relevance label '" + label + "'");
  }
  auto all = annotations();
  const json before = all.contains(doc_id) ? all[doc_id] : json(nullptr);
  if (label.empty()) {
    all.erase(doc_id);
  } else {
    all[doc_id] = label;
  }
  write_file(dir_ / "annotations.json", pretty(all));
  append_audit({{"event", "annotation"},
                {"doc_id", doc_id},
                {"before", before},
                {"after", label.empty() ? json(nullptr) : json(label)}});
}

void Session::write(Stage stage, const std::string& bytes) const {
  if (has(stage)) {
    throw ConflictError("stage " + std::string(to_string(stage)) + " already ran in session " + id_);
  }
  write_file(path(stage), bytes);
}

void Session::write_aux(const std::string& name, const std::string& bytes) const { write_file(dir_ / name, bytes); }

void Session::archive_query() const {
  const auto target = dir_ / "history" / std::to_string(history_size() + 1);
  fs::create_directories(target);
  for (auto stage : {Stage::query, Stage::retrieve, Stage::rank, Stage::report}) {
    if (has(stage)) fs::rename(path(stage), target / artifact_file(stage));
  }
  if (fs::exists(dir_ / "report.txt")) fs::rename(dir_ / "report.txt", target / "report.txt");
}

// --- runner --------------------------------------------------------------

void Runner::run(const Session& session, Stage stage, std::optional<std::size_t> k) const {
  if (session.has(stage)) {
    throw ConflictError("stage " + std::string(to_string(stage)) + " already ran in session " + session.id());
  }
  if (const auto up = upstream(stage); up && !session.has(*up)) {
    throw ConflictError("stage " + std::string(to_string(stage)) + " needs the " + std::string(to_string(*up)) +
                        " artifact first");
  }
  const auto& p = pipeline_;
  std::string bytes;
  try {
    const auto& patent = p.patent(session.patent_id());
    switch (stage) {
      case Stage::keyphrases:
        bytes = pretty(to_json(p.keyphrases(patent)));
        break;
      case Stage::sentences: {
        const auto kp = keyphrases_from_json(parse_artifact(session.read(Stage::keyphrases), Stage::keyphrases));
        bytes = pretty(to_json(p.sentences(patent, kp.keyphrases)));
        break;
      }
      case Stage::phrases: {
        const auto s = sentences_from_json(parse_artifact(session.read(Stage::sentences), Stage::sentences));
        const auto out = p.phrases(s);
        std::ostringstream dump;
        graph::write_graph_dump(out.graph, dump);
        session.write_aux("graph.json", dump.str());
        bytes = pretty(to_json(out.ranked));
        break;
      }
      case Stage::query: {
        const auto ranked = ranked_phrases_from_json(parse_artifact(session.read(Stage::phrases), Stage::phrases));
        bytes = pretty(retrieval::to_json(p.query(ranked, k)));
        break;
      }
      case Stage::retrieve: {
        const auto q = retrieval::query_from_json(parse_artifact(session.read(Stage::query), Stage::query));
        std::ostringstream out;
        retrieval::write_report(p.retrieve(patent, q), out);
        bytes = out.str();
        break;
      }
      case Stage::rank: {
        std::istringstream in(session.read(Stage::retrieve));
        std::ostringstream out;
        retrieval::write_report(p.rank(retrieval::read_retrieval_report(in)), out);
        bytes = out.str();
        break;
      }
      case Stage::report: {
        const auto ranked = ranked_phrases_from_json(parse_artifact(session.read(Stage::phrases), Stage::phrases));
        std::istringstream in(session.read(Stage::rank));
        const auto report = p.report(patent, ranked, retrieval::read_ranking_report(in));
        session.write_aux("report.txt", report.text);
        bytes = pretty(report.json);
        break;
      }
    }
  } catch (const ConflictError&) {
    throw;
  } catch (const StageError& e) {
    session.append_audit({{"event", "stage_failed"}, {"stage", to_string(stage)}, {"error", e.what()}});
    throw;
  } catch (const std::exception& e) {
    StageError err(std::string(to_string(stage)), e.what());
    session.append_audit({{"event", "stage_failed"}, {"stage", to_string(stage)}, {"error", err.what()}});
    throw err;
  }
  session.write(stage, bytes);
  json event = {{"event", "stage"},
                {"stage", to_string(stage)},
                {"artifact", artifact_file(stage)},
                {"parameters", stage_parameters(p.config(), stage)}};
  if (stage == Stage::query && k) event["k"] = *k;
  session.append_audit(std::move(event));
}

void Runner::edit_query(const Session& session, retrieval::StructuredQuery edited) const {
  if (!session.has(Stage::phrases)) throw ConflictError("editing the query needs the phrases artifact first");
  edited.k = edited.phrases.size();
  edited.provenance = retrieval::Provenance::human_edited;
  try {
    retrieval::validate(edited);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("invalid query: ") + e.what());
  }

  std::vector<std::string> before;
  json archived = nullptr;
  if (session.has(Stage::query)) {
    before = retrieval::query_from_json(json::parse(session.read(Stage::query))).phrases;
    session.archive_query();
    archived = "history/" + std::to_string(session.history_size());
  }
  const auto q = retrieval::to_json(edited);
  session.write(Stage::query, pretty(q));
  session.append_audit({{"event", "query_edit"},
                        {"before", before},
                        {"after", edited.phrases},
                        {"sections", q["sections"]},
                        {"match_mode", q["match_mode"]},
                        {"min_phrase_matches", edited.min_phrase_matches},
                        {"editor_note", edited.editor_note},
                        {"archived", archived}});
}

Session Runner::run_all(const fs::path& dir, const std::string& patent_id) const {
  pipeline_.patent(patent_id);  // unknown patents fail before anything is written
  auto session = Session::create(dir, dir.filename().string(), patent_id, pipeline_.config());
  for (auto stage : kAllStages) run(session, stage);
  return session;
}

std::vector<Stage> replay(const fs::path& session_dir, const fs::path& scratch) {
  const auto original = Session::open(session_dir);
  const Pipeline pipeline(original.config());
  const Runner runner(pipeline);
  const auto copy = Session::create(scratch, original.id(), original.patent_id(), pipeline.config());

  for (auto stage : kAllStages) {
    if (!original.has(stage)) break;
    if (stage == Stage::query) {
      const auto q = retrieval::query_from_json(json::parse(original.read(Stage::query)));
      if (q.provenance == retrieval::Provenance::human_edited) {
        runner.edit_query(copy, q);
      } else {
        runner.run(copy, stage, q.k);
      }
      continue;
    }
    runner.run(copy, stage);
  }

  std::vector<Stage> differ;
  for (auto stage : kAllStages) {
    if (original.has(stage) != copy.has(stage) ||
        (original.has(stage) && original.read(stage) != copy.read(stage))) {
      differ.push_back(stage);
    }
  }
  return differ;
}

}  // namespace priorart::app
