#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "priorart/app/config.h"
#include "priorart/app/pipeline.h"
#include "priorart/app/service.h"
#include "priorart/app/session.h"
#include "priorart/corpus/corpus.h"
#include "support/synthetic.h"

using namespace priorart;
using namespace priorart::app;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("priorart_app_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Small synthetic corpus plus one patent whose only code is not in the IPC
// table, written once per test binary.
struct Fixture {
  fs::path root;
  RunConfig config;
  testing::SyntheticCorpus synthetic;

  Fixture() : root(fresh_dir("fixture")) {
    RunConfig base;
    base.corpus = root / "corpus.jsonl";
    const auto table = ipc::load_descriptions(default_ipc_table());
    synthetic = testing::make_synthetic_corpus(base, table, 120, 3);
    corpus::PatentDocument orphan;
    orphan.id = "ORPHAN-1";
    orphan.title = "Soil working implement";
    orphan.claims = {"1. A plough comprising a share."};
    orphan.independent_claims = orphan.claims;
    orphan.has_title = orphan.has_independent_claims = true;
    orphan.ipc_codes = {corpus::IpcCode::parse("A01B1/00")};
    synthetic.documents.push_back(orphan);
    testing::write_jsonl(synthetic, base.corpus);
    config = base;
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

const Pipeline& pipeline() {
  static const Pipeline p(fixture().config);
  return p;
}

}  // namespace

TEST_CASE("a config with only a corpus path is complete and round-trips") {
  const auto c = config_from_json(json{{"corpus", "/data/corpus.jsonl"}});
  CHECK(c.k == 16);
  CHECK(c.sentence_threshold == 0.5);
  CHECK(c.graph.edge_threshold == 0.6);
  CHECK(c.ranking.tau_match == 0.6);
  CHECK(c.phase1_provider.dim == 384);
  CHECK(c.phase3_provider.dim == 768);
  CHECK(to_json(config_from_json(to_json(c))) == to_json(c));
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(config_from_json(json::object()), ConfigError);
  CHECK_THROWS_WITH_AS(config_from_json(json{{"corpus", "c"}, {"graph", {{"alpah", 0.1}}}}),
                       doctest::Contains("alpah"), ConfigError);
  CHECK_THROWS_WITH_AS(config_from_json(json{{"corpus", "c"}, {"graph", {{"alpha", 0.5}, {"beta", 0.4}, {"delta", 0.2}}}}),
                       doctest::Contains("must not exceed 1"), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"corpus", "c"}, {"query", {{"match_mode", "fuzzy"}}}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"corpus", "c"}, {"query", {{"k", 20}}}}), ConfigError);
  CHECK_NOTHROW(config_from_json(json{{"corpus", "c"}, {"query", {{"k", 20}, {"override_k_bounds", true}}}}));
  CHECK_THROWS_AS(config_from_json(json{{"corpus", "c"}, {"seed", "seven"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"corpus", "c"}, {"phase1_provider", {{"kind", "magic"}}}}), ConfigError);

  const auto dir = fresh_dir("config");
  std::ofstream(dir / "run.json") << R"({"corpus": "corpus.jsonl", "query": {"sections": ["title", "claims"]}})";
  const auto c = load_config(dir / "run.json");
  CHECK(c.corpus == dir / "corpus.jsonl");
  CHECK(c.sections == std::vector<corpus::Section>{corpus::Section::title, corpus::Section::claims});
  std::ofstream(dir / "bad.json") << "{";
  CHECK_THROWS_AS(load_config(dir / "bad.json"), ConfigError);
}

TEST_CASE("stage order") {
  CHECK(kAllStages.size() == 7);
  CHECK_FALSE(upstream(Stage::keyphrases));
  for (std::size_t i = 1; i < kAllStages.size(); ++i) CHECK(upstream(kAllStages[i]) == kAllStages[i - 1]);
  for (auto s : kAllStages) CHECK(parse_stage(to_string(s)) == s);
  CHECK_FALSE(parse_stage("results"));
}

TEST_CASE("run_pipeline produces all seven artifacts and full recall") {
  const auto dir = fresh_dir("run") / "session";
  const Runner runner(pipeline());
  const auto& q = fixture().synthetic.queries[1];
  const auto session = runner.run_all(dir, q.id);
  CHECK(session.completed().size() == 7);
  for (auto s : kAllStages) CHECK(fs::file_size(session.path(s)) > 0);
  CHECK(fs::exists(dir / "graph.json"));
  CHECK(fs::exists(dir / "report.txt"));

  const auto report = json::parse(slurp(session.path(Stage::report)));
  CHECK(report["recall"].get<double>() == 1.0);
  CHECK(report["evaluation"]["per_k"].size() == 5);
  for (const auto& row : report["evaluation"]["per_k"]) CHECK(row["found"] == row["total"]);

  const auto ranked = retrieval::read_ranking_report(session.path(Stage::rank));
  const auto retrieved = retrieval::read_retrieval_report(session.path(Stage::retrieve));
  CHECK(ranked.results.size() == retrieved.doc_ids.size());

  const auto audit = session.audit();
  REQUIRE(audit.size() == 8);
  CHECK(audit[0]["event"] == "created");
  for (std::size_t i = 0; i < audit.size(); ++i) CHECK(audit[i]["seq"] == i + 1);
  CHECK(audit[3]["stage"] == "phrases");
  CHECK(audit[3]["parameters"]["graph"]["edge_threshold"] == 0.6);
}

TEST_CASE("identical config and seed give byte-identical artifacts, and a session replays") {
  const auto root = fresh_dir("determinism");
  const Runner runner(pipeline());
  const auto& q = fixture().synthetic.queries[0];
  const auto a = runner.run_all(root / "a", q.id);
  const Pipeline second(fixture().config);
  const auto b = Runner(second).run_all(root / "b", q.id);
  for (auto s : kAllStages) CHECK(slurp(a.path(s)) == slurp(b.path(s)));
  CHECK(replay(root / "a", root / "replayed").empty());
}

TEST_CASE("a patent without IPC table coverage fails at the ipc-knowledge stage") {
  const auto dir = fresh_dir("orphan") / "session";
  const Runner runner(pipeline());
  try {
    runner.run_all(dir, "ORPHAN-1");
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "ipc-knowledge");
  }
  // The partial session stays for inspection.
  const auto session = Session::open(dir);
  CHECK(session.completed().empty());
  CHECK(session.audit().back()["event"] == "stage_failed");
  CHECK_THROWS_AS(runner.run_all(fresh_dir("unknown") / "s", "NO-SUCH-PATENT"), DataError);
}

TEST_CASE("stages only run in DAG order, once") {
  const auto dir = fresh_dir("dag") / "session";
  const Runner runner(pipeline());
  const auto session = Session::create(dir, "dag", fixture().synthetic.queries[2].id, pipeline().config());
  CHECK_THROWS_AS(runner.run(session, Stage::retrieve), ConflictError);
  CHECK_THROWS_AS(session.read(Stage::query), ConflictError);
  runner.run(session, Stage::keyphrases);
  CHECK_THROWS_AS(runner.run(session, Stage::keyphrases), ConflictError);
  CHECK_THROWS_AS(runner.run(session, Stage::phrases), ConflictError);
  CHECK_THROWS_AS(runner.edit_query(session, {}), ConflictError);
  CHECK_THROWS_AS(Session::create(dir, "again", "x", pipeline().config()), ConflictError);
}

TEST_CASE("a query edit is archived, audited and replayable") {
  const auto root = fresh_dir("edit");
  const Runner runner(pipeline());
  const auto session = runner.run_all(root / "s", fixture().synthetic.queries[3].id);
  const auto before = retrieval::query_from_json(json::parse(session.read(Stage::query)));
  const auto old_rank = session.read(Stage::rank);

  auto edited = before;
  edited.phrases.erase(edited.phrases.begin() + 2);
  edited.phrases.erase(edited.phrases.begin() + 4);
  edited.editor_note = "dropped two generic phrases";
  runner.edit_query(session, edited);

  CHECK(session.completed().size() == 4);
  CHECK(session.history_size() == 1);
  CHECK(slurp(root / "s" / "history" / "1" / "ranked.rpt") == old_rank);
  const auto now = retrieval::query_from_json(json::parse(session.read(Stage::query)));
  CHECK(now.provenance == retrieval::Provenance::human_edited);
  CHECK(now.k == 14);
  const auto event = session.audit().back();
  CHECK(event["event"] == "query_edit");
  CHECK(event["before"].get<std::vector<std::string>>() == before.phrases);
  CHECK(event["after"].get<std::vector<std::string>>() == edited.phrases);
  CHECK(event["archived"] == "history/1");

  for (auto s : {Stage::retrieve, Stage::rank, Stage::report}) runner.run(session, s);
  CHECK(replay(root / "s", root / "replayed").empty());

  auto empty = edited;
  empty.phrases.clear();
  CHECK_THROWS_AS(runner.edit_query(session, empty), DataError);
}

TEST_CASE("artifact JSON round trips") {
  const auto& p = pipeline();
  const auto& patent = p.patent(fixture().synthetic.queries[4].id);
  const auto kp = p.keyphrases(patent);
  CHECK(to_json(keyphrases_from_json(to_json(kp))) == to_json(kp));
  const auto s = p.sentences(patent, kp.keyphrases);
  CHECK(to_json(sentences_from_json(to_json(s))) == to_json(s));
  const auto ph = p.phrases(s);
  const auto back = ranked_phrases_from_json(to_json(ph.ranked));
  CHECK(to_json(back) == to_json(ph.ranked));
  CHECK_THROWS_AS(keyphrases_from_json(json{{"patent_id", 3}}), DataError);
  CHECK_THROWS_AS(sentences_from_json(json{{"sentences", json::array()}, {"selected", {{{"sentence", 4}, {"keyphrase", "x"}, {"similarity", 1.0}}}}}),
                  DataError);
}

TEST_CASE("S_d excludes the query patent and only holds covered documents") {
  const auto& p = pipeline();
  for (const auto& q : fixture().synthetic.queries) {
    const auto& patent = p.patent(q.id);
    const auto sd = p.candidates(patent);
    CHECK(sd.find(q.id) == nullptr);
    for (const auto& c : q.citations) CHECK(sd.find(c) != nullptr);
    for (const auto& d : sd.documents()) CHECK(d.ipc_codes.front() == q.code);
  }
}

TEST_CASE("HTTP service drives a session stage by stage") {
  const auto root = fresh_dir("service");
  Service service(pipeline(), root);
  const int port = service.bind("127.0.0.1", 0);
  std::thread server([&] { service.listen(); });
  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(60, 0);

  const auto health = client.Get("/healthz");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(json::parse(health->body)["documents"] == pipeline().corpus().size());

  const auto& q = fixture().synthetic.queries[0];
  auto created = client.Post("/sessions", json{{"patent_id", q.id}}.dump(), "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  const auto id = json::parse(created->body)["id"].get<std::string>();
  const auto base = "/sessions/" + id;

  CHECK(client.Get(base + "/artifacts/retrieve")->status == 409);
  CHECK(client.Post(base + "/stages/retrieve/run", "", "application/json")->status == 409);
  CHECK(client.Post(base + "/stages/bogus/run", "", "application/json")->status == 404);
  CHECK(client.Get("/sessions/s999999/report")->status == 404);

  for (const char* stage : {"keyphrases", "sentences", "phrases"}) {
    const auto r = client.Post(base + "/stages/" + stage + "/run", "", "application/json");
    REQUIRE(r);
    CHECK(r->status == 200);
  }
  CHECK(client.Post(base + "/stages/phrases/run", "", "application/json")->status == 409);
  const auto phrases = client.Get(base + "/artifacts/phrases");
  CHECK(phrases->status == 200);
  CHECK(phrases->body == slurp(root / id / "phrases.json"));
  const auto ranked = json::parse(phrases->body)["phrases"];
  REQUIRE(ranked.size() >= 16);

  // Examiner keeps 14 of the ranked phrases.
  json edit{{"phrases", json::array()}, {"sections", {"claims", "independent_claims"}}, {"match_mode", "exact_phrase"}};
  for (std::size_t i = 0; i < 16; ++i) {
    if (i != 3 && i != 7) edit["phrases"].push_back(ranked[i]["text"]);
  }
  const auto put = client.Put(base + "/query", edit.dump(), "application/json");
  REQUIRE(put);
  CHECK(put->status == 200);
  const auto state = json::parse(put->body);
  CHECK(state["query"]["provenance"] == "human_edited");
  CHECK(state["query"]["k"] == 14);
  CHECK(state["audit"]["event"] == "query_edit");
  CHECK(state["audit"]["after"] == edit["phrases"]);
  CHECK(Session::open(root / id).audit().back()["after"] == edit["phrases"]);

  CHECK(client.Put(base + "/query", "{\"phrases\": []}", "application/json")->status == 400);
  CHECK(client.Put(base + "/query", "not json", "application/json")->status == 400);

  for (const char* stage : {"retrieve", "rank", "report"}) {
    const auto r = client.Post(base + "/stages/" + stage + "/run", "", "application/json");
    REQUIRE(r);
    CHECK(r->status == 200);
  }
  const auto results = json::parse(client.Get(base + "/artifacts/rank")->body);
  const auto retrieved = json::parse(client.Get(base + "/artifacts/retrieve")->body);
  CHECK(results["count"] == retrieved["count"]);
  CHECK(results["query"]["provenance"] == "human_edited");
  const auto file_results = retrieval::read_ranking_report(root / id / "ranked.rpt");
  REQUIRE(results["results"].size() == file_results.results.size());
  for (std::size_t i = 0; i < file_results.results.size(); ++i) {
    CHECK(results["results"][i]["final_score"].get<double>() == file_results.results[i].final_score);
  }
  const auto report = client.Get(base + "/report");
  CHECK(report->status == 200);
  CHECK(json::parse(report->body)["query"]["provenance"] == "human_edited");

  // Annotations survive a re-submitted query; the old snapshot stays reachable.
  const auto annotated = client.Put(base + "/annotations/" + q.citations[0], R"({"label": "relevant"})",
                                    "application/json");
  REQUIRE(annotated);
  CHECK(annotated->status == 200);
  CHECK(client.Put(base + "/annotations/" + q.citations[1], R"({"label": "maybe"})", "application/json")->status ==
        400);
  CHECK(client.Put(base + "/annotations/NOPE", R"({"label": "unsure"})", "application/json")->status == 404);
  json resubmit = edit;
  resubmit["phrases"].erase(resubmit["phrases"].end() - 2, resubmit["phrases"].end());
  resubmit["editor_note"] = "drop two generic phrases";
  CHECK(client.Put(base + "/query", resubmit.dump(), "application/json")->status == 200);
  CHECK(client.Get(base + "/artifacts/rank")->status == 409);
  const auto old_rank = client.Get(base + "/history/1/rank");
  REQUIRE(old_rank);
  CHECK(old_rank->status == 200);
  CHECK(json::parse(old_rank->body)["count"] == results["count"]);
  CHECK(client.Get(base + "/history/2/rank")->status == 404);
  CHECK(json::parse(client.Get(base + "/annotations")->body)[q.citations[0]] == "relevant");
  const auto audit = json::parse(client.Get(base + "/audit")->body);
  CHECK(audit.back()["editor_note"] == "drop two generic phrases");
  CHECK(std::any_of(audit.begin(), audit.end(), [](const json& e) { return e["event"] == "annotation"; }));
  const auto state_now = json::parse(client.Get(base)->body);
  CHECK(state_now["history"] == 1);
  CHECK(state_now["stages"].size() == 4);
  CHECK(client.Put(base + "/annotations/" + q.citations[0], R"({"label": null})", "application/json")->status ==
        200);
  CHECK(json::parse(client.Get(base + "/annotations")->body).empty());
  CHECK(json::parse(client.Get("/sessions")->body).size() == 1);

  const auto doc = client.Get("/corpus/docs/" + q.citations[0]);
  CHECK(doc->status == 200);
  CHECK(json::parse(doc->body)["id"] == q.citations[0]);
  CHECK(client.Get("/corpus/docs/NOPE")->status == 404);
  CHECK(client.Post("/sessions", json{{"patent_id", "NOPE"}}.dump(), "application/json")->status == 404);
  CHECK(client.Post("/sessions", "{}", "application/json")->status == 400);

  // A stage that fails reports the stage by name.
  const auto orphan = json::parse(client.Post("/sessions", json{{"patent_id", "ORPHAN-1"}}.dump(), "application/json")->body);
  const auto failed = client.Post("/sessions/" + orphan["id"].get<std::string>() + "/stages/keyphrases/run", "",
                                  "application/json");
  CHECK(failed->status == 422);
  CHECK(json::parse(failed->body)["stage"] == "ipc-knowledge");

  service.stop();
  server.join();

  // A restarted service keeps the sessions on disk and continues numbering.
  Service restarted(pipeline(), root);
  const int port2 = restarted.bind("127.0.0.1", 0);
  std::thread server2([&] { restarted.listen(); });
  httplib::Client client2("127.0.0.1", port2);
  CHECK(client2.Get(base + "/history/1/report")->status == 200);
  CHECK(client2.Get(base + "/artifacts/query")->status == 200);
  const auto next = client2.Post("/sessions", json{{"patent_id", q.id}}.dump(), "application/json");
  CHECK(json::parse(next->body)["id"] == "s000003");
  restarted.stop();
  server2.join();
}

TEST_CASE("concurrent sessions run independently") {
  const auto root = fresh_dir("concurrent");
  Service service(pipeline(), root);
  const int port = service.bind("127.0.0.1", 0);
  std::thread server([&] { service.listen(); });

  std::vector<std::thread> clients;
  std::vector<int> failures(3, 0);
  for (int c = 0; c < 3; ++c) {
    clients.emplace_back([&, c] {
      httplib::Client client("127.0.0.1", port);
      client.set_read_timeout(60, 0);
      const auto& q = fixture().synthetic.queries[static_cast<std::size_t>(c)];
      const auto created = client.Post("/sessions", json{{"patent_id", q.id}}.dump(), "application/json");
      if (!created || created->status != 201) {
        ++failures[c];
        return;
      }
      const auto id = json::parse(created->body)["id"].get<std::string>();
      for (auto s : kAllStages) {
        const auto r = client.Post("/sessions/" + id + "/stages/" + std::string(to_string(s)) + "/run", "",
                                   "application/json");
        if (!r || r->status != 200) ++failures[c];
      }
      const auto report = client.Get("/sessions/" + id + "/report");
      if (!report || json::parse(report->body)["recall"] != 1.0) ++failures[c];
    });
  }
  for (auto& t : clients) t.join();
  service.stop();
  server.join();
  CHECK(failures == std::vector<int>{0, 0, 0});
}

TEST_CASE("binding a busy port is an error") {
  const auto root = fresh_dir("busy");
  Service first(pipeline(), root);
  const int port = first.bind("127.0.0.1", 0);
  Service second(pipeline(), root);
  CHECK_THROWS_AS(second.bind("127.0.0.1", port), Error);
}
