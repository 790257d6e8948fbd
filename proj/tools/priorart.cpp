// priorart command line: one verb per pipeline stage plus `run` and `serve`.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 stage failure.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>

#include "priorart/app/config.h"
#include "priorart/app/pipeline.h"
#include "priorart/app/service.h"
#include "priorart/app/session.h"
#include "priorart/corpus/corpus.h"
#include "priorart/error.h"
#include "priorart/ipc/descriptions.h"
#include "priorart/retrieval/report.h"
#include "priorart/text/noun_phrases.h"

namespace {

using namespace priorart;
namespace fs = std::filesystem;
using nlohmann::json;

struct Globals {
  std::string config;
  std::string corpus;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string table;
  std::optional<int> embed_timeout_ms;
};

app::RunConfig build_config(const Globals& g, bool need_corpus = true) {
  app::RunConfig c;
  if (!g.config.empty()) c = app::load_config(g.config);
  if (!g.corpus.empty()) c.corpus = g.corpus;
  if (!g.table.empty()) c.ipc_table = g.table;
  if (g.seed) c.seed = *g.seed;
  if (g.embed_timeout_ms) {
    c.phase1_provider.remote.timeout_ms = *g.embed_timeout_ms;
    c.phase3_provider.remote.timeout_ms = *g.embed_timeout_ms;
  }
  // Sessions record the config, so paths must not depend on the working directory.
  auto absolute = [](fs::path& p) {
    if (!p.empty()) p = fs::absolute(p).lexically_normal();
  };
  absolute(c.corpus);
  absolute(c.ipc_table);
  for (auto& b : c.baselines) absolute(b);
  for (auto* provider : {&c.phase1_provider, &c.phase3_provider}) {
    absolute(provider->store);
    absolute(provider->remote.cache);
  }
  if (!need_corpus) return c;  // validate() insists on a corpus path
  if (c.corpus.empty()) throw ConfigError("no corpus: pass --corpus or a --config naming one");
  app::validate(c);
  return c;
}

// Writes to `path`, or to stdout when it is empty.
void emit(const std::string& path, const std::function<void(std::ostream&)>& body) {
  if (path.empty()) {
    body(std::cout);
    std::cout.flush();
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  body(out);
  if (!out.flush()) throw DataError("cannot write " + path);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// "12:16" -> {12, 16}
std::pair<std::size_t, std::size_t> parse_range(const std::string& s) {
  const auto colon = s.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument(s);
    const auto lo = std::stoul(s.substr(0, colon));
    const auto hi = std::stoul(s.substr(colon + 1));
    if (lo == 0 || lo > hi) throw std::invalid_argument(s);
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw ConfigError("--k-range wants LO:HI with 1 <= LO <= HI, got '" + s + "'");
  }
}

void print_ingest(const corpus::IngestReport& r, std::ostream& out) {
  fmt::print(out, "records                     {}\n", r.records);
  for (auto s : corpus::kAllSections) {
    const auto n = r.section_coverage[static_cast<std::size_t>(s)];
    fmt::print(out, "  {:<25} {:>6}  {:5.1f}%\n", corpus::to_string(s), n,
               r.records ? 100.0 * static_cast<double>(n) / static_cast<double>(r.records) : 0.0);
  }
  fmt::print(out, "derived independent claims  {}\n", r.derived_independent_claims);
}

void print_ranked_phrases(const std::vector<graph::RankedPhrase>& ranked, std::ostream& out) {
  fmt::print(out, "{:>4}  {:<40} {:>9} {:>9} {:>9} {:>9} {:>9} {:>7}\n", "rank", "noun phrase", "score", "pagerank",
             "degree", "between", "semantic", "cluster");
  for (const auto& r : ranked) {
    fmt::print(out, "{:>4}  {:<40} {:>9.4f} {:>9.4f} {:>9.4f} {:>9.4f} {:>9.4f} {:>7}\n", r.rank, r.phrase.text,
               r.composite, r.pagerank, r.degree, r.betweenness, r.semantic, r.cluster);
  }
}

// Phase 1 for one patent, from the keyphrases to the ranked phrase list.
app::PhraseArtifact phase1(const app::Pipeline& p, const corpus::PatentDocument& patent) {
  const auto kp = p.keyphrases(patent);
  return p.phrases(p.sentences(patent, kp.keyphrases));
}

int cmd_ingest(const Globals& g, const std::string& in) {
  if (g.out.empty()) throw ConfigError("ingest needs --out <dir>");
  const auto result = corpus::ingest_file(in);
  corpus::save_corpus(result.corpus, g.out);
  print_ingest(result.report, std::cout);
  fmt::print("saved to {}\n", g.out);
  return 0;
}

int cmd_stats(const Globals& g) {
  if (g.corpus.empty()) throw ConfigError("stats needs --corpus");
  const auto c = app::open_corpus(g.corpus);
  emit(g.out, [&](std::ostream& out) {
    print_ingest(corpus::coverage_report(c), out);
    fmt::print(out, "normalization               {}\n", c.normalization_version());
    fmt::print(out, "index terms\n");
    for (auto s : corpus::kAllSections) {
      fmt::print(out, "  {:<25} {:>6}\n", corpus::to_string(s), c.index().term_count(s));
    }
  });
  return 0;
}

int cmd_ipc_describe(const Globals& g, const std::string& codes, const std::string& subgroups) {
  const auto c = build_config(g, false);
  const auto table = ipc::load_descriptions(c.ipc_table.empty() ? app::default_ipc_table() : c.ipc_table);
  std::vector<corpus::IpcCode> parsed;
  for (const auto& s : split_list(codes)) {
    try {
      parsed.push_back(corpus::IpcCode::parse(s));
    } catch (const std::invalid_argument& e) {
      throw DataError(e.what());
    }
  }
  if (parsed.empty()) throw ConfigError("--codes lists no IPC code");
  ipc::AggregateOptions options;
  options.expansion = subgroups.empty() ? c.subgroups : ipc::parse_expansion(subgroups);
  const auto agg = ipc::aggregate(table, parsed, options);
  emit(g.out, [&](std::ostream& out) {
    for (const auto& d : agg.descriptions) fmt::print(out, "{}\t{}\n", d.code.str(), d.text);
    for (const auto& m : agg.missing) fmt::print(out, "# missing\t{}\n", m.str());
  });
  return agg.descriptions.empty() ? 3 : 0;
}

int cmd_keyphrases(const Globals& g, const std::string& patent_id, std::size_t top) {
  const app::Pipeline p(build_config(g));
  const auto kp = p.keyphrases(p.patent(patent_id));
  emit(g.out, [&](std::ostream& out) {
    fmt::print(out, "patent {}\n", patent_id);
    for (const auto& d : kp.descriptions) fmt::print(out, "description {}\n", d.code.str());
    for (const auto& m : kp.missing) fmt::print(out, "missing {}\n", m.str());
    fmt::print(out, "\n{:>4}  {:<40} {:>12}  {}\n", "rank", "keyphrase", "score", "source");
    const auto n = top ? std::min(top, kp.keyphrases.size()) : kp.keyphrases.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& k = kp.keyphrases[i];
      fmt::print(out, "{:>4}  {:<40} {:>12.6g}  {}\n", i + 1, k.text, k.score, k.source);
    }
  });
  return 0;
}

int cmd_analyze(Globals g, const std::string& patent_id, std::optional<double> threshold) {
  auto config = build_config(g);
  if (threshold) config.sentence_threshold = *threshold;
  app::validate(config);
  const app::Pipeline p(config);
  const auto& patent = p.patent(patent_id);
  const auto kp = p.keyphrases(patent);
  const auto sentences = p.sentences(patent, kp.keyphrases);
  const auto phrases = text::extract_noun_phrases(sentences);
  emit(g.out, [&](std::ostream& out) {
    fmt::print(out, "patent {}  threshold {}  sentences {}/{}\n\n", patent_id, config.sentence_threshold,
               sentences.selected.size(), sentences.sentences.size());
    for (const auto& s : sentences.selected) {
      fmt::print(out, "[{:>3}] {:.4f}  {:<30}  {}\n", s.sentence, s.similarity, s.keyphrase,
                 sentences.sentences[s.sentence].text);
    }
    fmt::print(out, "\nnoun phrases {}\n", phrases.size());
    for (const auto& np : phrases) fmt::print(out, "[{:>3}] {}\n", np.source_sentence, np.text);
  });
  return 0;
}

int cmd_rank_phrases(const Globals& g, const std::string& patent_id, const std::string& graph_dump) {
  const app::Pipeline p(build_config(g));
  const auto out = phase1(p, p.patent(patent_id));
  emit(g.out, [&](std::ostream& os) { print_ranked_phrases(out.ranked, os); });
  if (!graph_dump.empty()) emit(graph_dump, [&](std::ostream& os) { graph::write_graph_dump(out.graph, os); });
  return 0;
}

int cmd_retrieve(const Globals& g, const std::string& patent_id, std::optional<std::size_t> k) {
  const app::Pipeline p(build_config(g));
  const auto& patent = p.patent(patent_id);
  const auto query = p.query(phase1(p, patent).ranked, k);
  const auto report = p.retrieve(patent, query);
  emit(g.out, [&](std::ostream& out) { retrieval::write_report(report, out); });
  if (!g.out.empty()) fmt::print("{} documents retrieved with k={}\n", report.doc_ids.size(), query.k);
  return 0;
}

int cmd_rank(const Globals& g, const std::string& results) {
  const app::Pipeline p(build_config(g));
  const auto ranking = p.rank(retrieval::read_retrieval_report(results));
  emit(g.out, [&](std::ostream& out) { retrieval::write_report(ranking, out); });
  if (!g.out.empty()) fmt::print("{} documents ranked\n", ranking.results.size());
  return 0;
}

int cmd_evaluate(const Globals& g, const std::string& patent_id, const std::string& k_range,
                 const std::string& baselines, std::optional<std::size_t> k) {
  if (g.out.empty()) throw ConfigError("evaluate needs --out <dir>");
  auto config = build_config(g);
  if (!k_range.empty()) std::tie(config.k_bounds.min, config.k_bounds.max) = parse_range(k_range);
  if (k) config.k = *k;
  if (!baselines.empty()) {
    config.baselines.clear();
    for (const auto& b : split_list(baselines)) config.baselines.push_back(fs::absolute(b).lexically_normal());
  }
  app::validate(config);
  const app::Pipeline p(config);
  const auto& patent = p.patent(patent_id);
  const auto ranked = phase1(p, patent).ranked;
  const auto ranking = p.rank(p.retrieve(patent, p.query(ranked)));
  const auto report = p.report(patent, ranked, ranking);
  const fs::path dir(g.out);
  emit((dir / "report.json").string(), [&](std::ostream& out) { out << report.json.dump(2) << '\n'; });
  emit((dir / "report.txt").string(), [&](std::ostream& out) { out << report.text; });
  emit((dir / "ranked.rpt").string(), [&](std::ostream& out) { retrieval::write_report(ranking, out); });
  std::cout << report.text;
  return 0;
}

int cmd_run(const Globals& g, const std::string& patent_id) {
  if (g.out.empty()) throw ConfigError("run needs --out <session dir>");
  const app::Pipeline p(build_config(g));
  const app::Runner runner(p);
  const auto session = runner.run_all(g.out, patent_id);
  fmt::print("session {} written to {}\n\n", session.id(), session.dir().string());
  std::ifstream text(session.dir() / "report.txt");
  std::cout << text.rdbuf();
  return 0;
}

int cmd_replay(const std::string& session_dir, const Globals& g) {
  const fs::path scratch = g.out.empty() ? fs::temp_directory_path() / fmt::format("priorart-replay-{}", ::getpid())
                                         : fs::path(g.out);
  if (fs::exists(scratch / "session.json")) throw ConfigError("replay target already holds a session: " + scratch.string());
  const auto differ = app::replay(session_dir, scratch);
  if (g.out.empty()) fs::remove_all(scratch);
  if (differ.empty()) {
    fmt::print("replay identical\n");
    return 0;
  }
  for (auto s : differ) fmt::print("differs: {}\n", app::to_string(s));
  return 4;
}

int cmd_serve(const Globals& g, const std::string& address, const std::string& sessions) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos) throw ConfigError("--address wants host:port, got '" + address + "'");
  const auto host = address.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(address.substr(colon + 1));
  } catch (const std::logic_error&) {
    throw ConfigError("bad port in '" + address + "'");
  }
  if (port < 0 || port > 65535) throw ConfigError("bad port in '" + address + "'");

  // Block the stop signals in every thread; one thread waits for them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const app::Pipeline p(build_config(g));
  app::Service service(p, sessions.empty() ? fs::path(g.out.empty() ? "sessions" : g.out) : fs::path(sessions));
  int bound = 0;
  try {
    bound = service.bind(host, port);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  fmt::print("listening on {}:{} ({} documents)\n", host, bound, p.corpus().size());
  std::cout.flush();
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    service.stop();
  });
  service.listen();
  // listen() can also return on its own; wake the waiter so it can be joined.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"priorart: IPC-guided prior-art search"};
  cli.require_subcommand(1);
  cli.fallthrough();

  Globals g;
  cli.add_option("--config", g.config, "run configuration (JSON)")->check(CLI::ExistingFile);
  cli.add_option("--corpus", g.corpus, "corpus directory or JSONL file");
  cli.add_option("--seed", g.seed, "seed for the hash embedding providers");
  cli.add_option("--out", g.out, "output file or directory");
  cli.add_option("--table", g.table, "IPC description table");
  cli.add_option("--embed-timeout-ms", g.embed_timeout_ms, "remote embedding request timeout");

  std::string in, codes, subgroups, patent, graph_dump, results, k_range, baselines, replay_dir;
  std::string address = "127.0.0.1:8080", sessions;
  std::size_t top = 0;
  std::optional<double> threshold;
  std::optional<std::size_t> k;
  int rc = 0;

  auto* ingest = cli.add_subcommand("ingest", "parse a JSONL corpus and save it as a corpus directory");
  ingest->add_option("--in", in, "JSONL corpus")->required()->check(CLI::ExistingFile);
  ingest->callback([&] { rc = cmd_ingest(g, in); });

  auto* stats = cli.add_subcommand("stats", "section coverage and index size of a corpus");
  stats->callback([&] { rc = cmd_stats(g); });

  auto* ipc_cmd = cli.add_subcommand("ipc", "IPC description table");
  ipc_cmd->require_subcommand(1);
  auto* describe = ipc_cmd->add_subcommand("describe", "aggregated descriptions for a list of codes");
  describe->add_option("--codes", codes, "comma separated IPC codes")->required();
  describe->add_option("--subgroups", subgroups, "siblings | listed-only");
  describe->callback([&] { rc = cmd_ipc_describe(g, codes, subgroups); });

  auto* keyphrases = cli.add_subcommand("keyphrases", "IPC keyphrases of a patent");
  keyphrases->add_option("--patent", patent)->required();
  keyphrases->add_option("--top", top, "print only the first N");
  keyphrases->callback([&] { rc = cmd_keyphrases(g, patent, top); });

  auto* analyze = cli.add_subcommand("analyze", "selected sentences and noun phrases of a patent");
  analyze->add_option("--patent", patent)->required();
  analyze->add_option("--sentence-threshold", threshold);
  analyze->callback([&] { rc = cmd_analyze(g, patent, threshold); });

  auto* rank_phrases = cli.add_subcommand("rank-phrases", "graph-ranked noun phrases of a patent");
  rank_phrases->add_option("--patent", patent)->required();
  rank_phrases->add_option("--graph-dump", graph_dump, "write the phrase graph as JSON");
  rank_phrases->callback([&] { rc = cmd_rank_phrases(g, patent, graph_dump); });

  auto* retrieve = cli.add_subcommand("retrieve", "top-k query and section search");
  retrieve->add_option("--patent", patent)->required();
  retrieve->add_option("--k", k);
  retrieve->callback([&] { rc = cmd_retrieve(g, patent, k); });

  auto* rank = cli.add_subcommand("rank", "re-rank a retrieval report");
  rank->add_option("--results", results, "report written by retrieve")->required()->check(CLI::ExistingFile);
  rank->callback([&] { rc = cmd_rank(g, results); });

  auto* evaluate = cli.add_subcommand("evaluate", "recall, k sweep and baseline comparison for a patent");
  evaluate->add_option("--patent", patent)->required();
  evaluate->add_option("--k-range", k_range, "LO:HI, default from the config");
  evaluate->add_option("--k", k, "query size for the ranked list");
  evaluate->add_option("--baselines", baselines, "comma separated baseline result lists");
  evaluate->callback([&] { rc = cmd_evaluate(g, patent, k_range, baselines, k); });

  auto* run = cli.add_subcommand("run", "whole pipeline into a session directory, or replay one");
  auto* run_patent = run->add_option("--patent", patent);
  auto* replay = run->add_option("--replay", replay_dir, "session directory to re-run and compare")
                     ->check(CLI::ExistingDirectory);
  run_patent->excludes(replay);
  run->callback([&] {
    if (!replay_dir.empty()) {
      rc = cmd_replay(replay_dir, g);
    } else if (patent.empty()) {
      throw ConfigError("run needs --patent or --replay");
    } else {
      rc = cmd_run(g, patent);
    }
  });

  auto* serve = cli.add_subcommand("serve", "HTTP service");
  serve->add_option("--address", address, "host:port (port 0 picks one)");
  serve->add_option("--sessions", sessions, "session root directory (default --out or ./sessions)");
  serve->callback([&] { rc = cmd_serve(g, address, sessions); });

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 2;
  } catch (const DataError& e) {
    fmt::print(stderr, "data error: {}\n", e.what());
    return 3;
  } catch (const StageError& e) {
    fmt::print(stderr, "{}\n", e.what());
    return 4;
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 4;
  }
  return rc;
}
