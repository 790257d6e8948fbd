#include "priorart/app/config.h"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "priorart/error.h"

namespace priorart::app {
namespace {

using nlohmann::json;

// Reads the members of one JSON object, remembering which keys were used so
// leftovers can be reported.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(label() + "must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    used_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(label() + "field '" + key + "' has the wrong type");
    }
  }

  void read_path(const char* key, std::filesystem::path& out, const std::filesystem::path& base) {
    std::string s;
    read(key, s);
    if (s.empty()) return;
    std::filesystem::path p(s);
    out = p.is_relative() && !base.empty() ? base / p : p;
  }

  const json* object(const char* key) {
    used_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) throw ConfigError(label() + "unknown field '" + key + "'");
    }
  }

 private:
  std::string label() const { return where_.empty() ? "config: " : "config " + where_ + ": "; }

  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

void read_provider(const json& j, const char* where, embedding::ProviderConfig& p, const std::filesystem::path& base) {
  Fields f(j, where);
  f.read("kind", p.kind);
  f.read("dim", p.dim);
  f.read_path("store", p.store, base);
  if (const auto* remote = f.object("remote")) {
    Fields r(*remote, std::string(where) + ".remote");
    r.read("url", p.remote.url);
    r.read("model", p.remote.model);
    r.read("timeout_ms", p.remote.timeout_ms);
    r.read("max_batch", p.remote.max_batch);
    r.read("attempts", p.remote.attempts);
    r.read("backoff_ms", p.remote.backoff_ms);
    r.read("backoff_cap_ms", p.remote.backoff_cap_ms);
    r.read("parallelism", p.remote.parallelism);
    r.read_path("cache", p.remote.cache, base);
    r.finish();
  }
  f.finish();
}

json provider_json(const embedding::ProviderConfig& p) {
  return {{"kind", p.kind},
          {"dim", p.dim},
          {"store", p.store.string()},
          {"remote",
           {{"url", p.remote.url},
            {"model", p.remote.model},
            {"timeout_ms", p.remote.timeout_ms},
            {"max_batch", p.remote.max_batch},
            {"attempts", p.remote.attempts},
            {"backoff_ms", p.remote.backoff_ms},
            {"backoff_cap_ms", p.remote.backoff_cap_ms},
            {"parallelism", p.remote.parallelism},
            {"cache", p.remote.cache.string()}}}};
}

void check(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("config: " + what);
}

bool unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

std::filesystem::path default_ipc_table() { return std::filesystem::path(PRIORART_RESOURCE_DIR) / "ipc" / "descriptions.tsv"; }

void validate(const RunConfig& c) {
  check(!c.corpus.empty(), "corpus path is required");
  for (const auto* p : {&c.phase1_provider, &c.phase3_provider}) {
    check(p->kind == "hash" || p->kind == "file" || p->kind == "remote",
          "unknown provider kind '" + p->kind + "' (expected hash|file|remote)");
    check(p->dim >= 8, "provider dim must be at least 8");
  }
  check(c.keyphrases.max_per_doc >= 1, "keyphrase.max_per_doc must be positive");
  check(c.keyphrases.window >= 1, "keyphrase.window must be positive");
  check(c.sentence_threshold >= -1.0 && c.sentence_threshold <= 1.0, "sentence_threshold must lie in [-1, 1]");
  const auto& g = c.graph;
  check(g.min_cluster_size >= 2, "graph.min_cluster_size must be at least 2");
  check(g.edge_threshold >= -1.0 && g.edge_threshold <= 1.0, "graph.edge_threshold must lie in [-1, 1]");
  check(unit_interval(g.alpha_c) && unit_interval(g.alpha_u), "graph.alpha_c and graph.alpha_u must lie in [0, 1]");
  check(g.weights.alpha >= 0 && g.weights.beta >= 0 && g.weights.delta >= 0, "rank weights must be non-negative");
  check(g.weights.alpha + g.weights.beta + g.weights.delta <= 1.0 + 1e-12,
        "rank weights alpha + beta + delta must not exceed 1");
  check(g.pagerank.damping > 0 && g.pagerank.damping <= 1, "graph.damping must lie in (0, 1]");
  check(g.pagerank.tolerance > 0, "graph.tolerance must be positive");
  check(g.pagerank.max_iterations >= 1, "graph.max_iterations must be positive");
  check(c.k >= 1, "query.k must be positive");
  check(c.k_bounds.min >= 1 && c.k_bounds.min <= c.k_bounds.max, "query.k_min must be in [1, k_max]");
  check(c.k_bounds.override_bounds || (c.k >= c.k_bounds.min && c.k <= c.k_bounds.max),
        "query.k must lie within [k_min, k_max] unless override_k_bounds is set");
  check(!c.sections.empty(), "query.sections must not be empty");
  check(c.min_phrase_matches >= 1, "query.min_phrase_matches must be positive");
  check(c.ranking.lambda >= 0, "ranking.lambda must be non-negative");
  check(c.ranking.tau_match >= -1.0 && c.ranking.tau_match <= 1.0, "ranking.tau_match must lie in [-1, 1]");
  for (auto n : c.recall_at) check(n >= 1, "evaluation.recall_at values must be positive");
  check(c.workers >= 1, "workers must be positive");
}

RunConfig config_from_json(const json& j, const std::filesystem::path& base) {
  RunConfig c;
  Fields f(j, "");
  f.read_path("corpus", c.corpus, base);
  f.read_path("ipc_table", c.ipc_table, base);
  f.read("seed", c.seed);
  f.read("workers", c.workers);
  f.read("sentence_threshold", c.sentence_threshold);
  if (const auto* p = f.object("phase1_provider")) read_provider(*p, "phase1_provider", c.phase1_provider, base);
  if (const auto* p = f.object("phase3_provider")) read_provider(*p, "phase3_provider", c.phase3_provider, base);

  if (const auto* k = f.object("keyphrase")) {
    Fields kf(*k, "keyphrase");
    kf.read("max_per_doc", c.keyphrases.max_per_doc);
    kf.read("window", c.keyphrases.window);
    kf.read("min_term_length", c.keyphrases.min_term_length);
    std::string subgroups;
    kf.read("subgroups", subgroups);
    if (!subgroups.empty()) c.subgroups = ipc::parse_expansion(subgroups);
    kf.finish();
  }
  if (const auto* g = f.object("graph")) {
    Fields gf(*g, "graph");
    gf.read("min_cluster_size", c.graph.min_cluster_size);
    gf.read("edge_threshold", c.graph.edge_threshold);
    gf.read("alpha_c", c.graph.alpha_c);
    gf.read("alpha_u", c.graph.alpha_u);
    gf.read("alpha", c.graph.weights.alpha);
    gf.read("beta", c.graph.weights.beta);
    gf.read("delta", c.graph.weights.delta);
    gf.read("damping", c.graph.pagerank.damping);
    gf.read("tolerance", c.graph.pagerank.tolerance);
    gf.read("max_iterations", c.graph.pagerank.max_iterations);
    gf.finish();
  }
  if (const auto* q = f.object("query")) {
    Fields qf(*q, "query");
    qf.read("k", c.k);
    qf.read("k_min", c.k_bounds.min);
    qf.read("k_max", c.k_bounds.max);
    qf.read("override_k_bounds", c.k_bounds.override_bounds);
    std::vector<std::string> sections;
    qf.read("sections", sections);
    if (q->contains("sections")) {
      c.sections.clear();
      for (const auto& s : sections) {
        try {
          c.sections.push_back(corpus::parse_section(s));
        } catch (const std::invalid_argument&) {
          throw ConfigError("config query: unknown section '" + s + "'");
        }
      }
    }
    std::string mode;
    qf.read("match_mode", mode);
    if (!mode.empty()) c.match_mode = retrieval::parse_match_mode(mode);
    qf.read("min_phrase_matches", c.min_phrase_matches);
    qf.finish();
  }
  if (const auto* r = f.object("ranking")) {
    Fields rf(*r, "ranking");
    rf.read("tau_match", c.ranking.tau_match);
    rf.read("lambda", c.ranking.lambda);
    rf.finish();
  }
  if (const auto* e = f.object("evaluation")) {
    Fields ef(*e, "evaluation");
    ef.read("recall_at", c.recall_at);
    std::vector<std::string> baselines;
    ef.read("baselines", baselines);
    for (const auto& b : baselines) {
      std::filesystem::path p(b);
      c.baselines.push_back(p.is_relative() && !base.empty() ? base / p : p);
    }
    ef.finish();
  }
  f.finish();
  c.graph.workers = c.workers;
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

json to_json(const RunConfig& c) {
  std::vector<std::string> sections, baselines;
  for (auto s : c.sections) sections.emplace_back(corpus::to_string(s));
  for (const auto& b : c.baselines) baselines.push_back(b.string());
  return {
      {"corpus", c.corpus.string()},
      {"ipc_table", c.ipc_table.string()},
      {"seed", c.seed},
      {"workers", c.workers},
      {"sentence_threshold", c.sentence_threshold},
      {"phase1_provider", provider_json(c.phase1_provider)},
      {"phase3_provider", provider_json(c.phase3_provider)},
      {"keyphrase",
       {{"max_per_doc", c.keyphrases.max_per_doc},
        {"window", c.keyphrases.window},
        {"min_term_length", c.keyphrases.min_term_length},
        {"subgroups", c.subgroups == ipc::SubgroupExpansion::siblings ? "siblings" : "listed-only"}}},
      {"graph",
       {{"min_cluster_size", c.graph.min_cluster_size},
        {"edge_threshold", c.graph.edge_threshold},
        {"alpha_c", c.graph.alpha_c},
        {"alpha_u", c.graph.alpha_u},
        {"alpha", c.graph.weights.alpha},
        {"beta", c.graph.weights.beta},
        {"delta", c.graph.weights.delta},
        {"damping", c.graph.pagerank.damping},
        {"tolerance", c.graph.pagerank.tolerance},
        {"max_iterations", c.graph.pagerank.max_iterations}}},
      {"query",
       {{"k", c.k},
        {"k_min", c.k_bounds.min},
        {"k_max", c.k_bounds.max},
        {"override_k_bounds", c.k_bounds.override_bounds},
        {"sections", sections},
        {"match_mode", std::string(retrieval::to_string(c.match_mode))},
        {"min_phrase_matches", c.min_phrase_matches}}},
      {"ranking", {{"tau_match", c.ranking.tau_match}, {"lambda", c.ranking.lambda}}},
      {"evaluation", {{"recall_at", c.recall_at}, {"baselines", baselines}}},
  };
}

}  // namespace priorart::app
