#include "priorart/app/pipeline.h"

#include <algorithm>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "priorart/retrieval/search.h"
#include "priorart/text/noun_phrases.h"

namespace priorart::app {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 7> kStageNames = {"keyphrases", "sentences", "phrases", "query",
                                                         "retrieve",   "rank",      "report"};
constexpr std::array<std::string_view, 7> kArtifactFiles = {"keyphrases.json", "sentences.json", "phrases.json",
                                                            "query.json",      "retrieved.rpt",  "ranked.rpt",
                                                            "report.json"};

template <typename F>
auto guarded(Stage stage, F&& body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(std::string(to_string(stage)), e.what());
  }
}

template <typename F>
auto parsing(const char* what, F&& body) {
  try {
    return body();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed ") + what + " artifact: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("malformed ") + what + " artifact: " + e.what());
  }
}

std::unique_ptr<embedding::EmbeddingProvider> provider(embedding::ProviderConfig p, std::uint64_t seed) {
  p.seed = seed;
  return embedding::make_provider(p);
}

}  // namespace

std::string_view to_string(Stage stage) noexcept { return kStageNames[static_cast<std::size_t>(stage)]; }

std::optional<Stage> parse_stage(std::string_view name) {
  for (auto s : kAllStages) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::optional<Stage> upstream(Stage stage) noexcept {
  if (stage == Stage::keyphrases) return std::nullopt;
  return static_cast<Stage>(static_cast<int>(stage) - 1);
}

std::string_view artifact_file(Stage stage) noexcept { return kArtifactFiles[static_cast<std::size_t>(stage)]; }

// --- artifact JSON -------------------------------------------------------

json to_json(const KeyphraseArtifact& a) {
  json j;
  j["patent_id"] = a.patent_id;
  j["descriptions"] = json::array();
  for (const auto& d : a.descriptions) j["descriptions"].push_back({{"code", d.code.str()}, {"text", d.text}});
  j["missing"] = json::array();
  for (const auto& c : a.missing) j["missing"].push_back(c.str());
  j["keyphrases"] = json::array();
  for (const auto& k : a.keyphrases) {
    j["keyphrases"].push_back({{"text", k.text}, {"score", k.score}, {"source", k.source}});
  }
  return j;
}

KeyphraseArtifact keyphrases_from_json(const json& j) {
  return parsing("keyphrases", [&] {
    KeyphraseArtifact a;
    a.patent_id = j.at("patent_id").get<std::string>();
    for (const auto& d : j.at("descriptions")) {
      a.descriptions.push_back({corpus::IpcCode::parse(d.at("code").get<std::string>()), d.at("text").get<std::string>()});
    }
    for (const auto& c : j.at("missing")) a.missing.push_back(corpus::IpcCode::parse(c.get<std::string>()));
    for (const auto& k : j.at("keyphrases")) {
      a.keyphrases.push_back(
          {k.at("text").get<std::string>(), k.at("score").get<double>(), k.at("source").get<std::string>()});
    }
    return a;
  });
}

json to_json(const text::SentenceSet& s) {
  json j;
  j["sentences"] = json::array();
  for (const auto& sent : s.sentences) {
    j["sentences"].push_back({{"text", sent.text}, {"begin", sent.begin}, {"end", sent.end}});
  }
  j["selected"] = json::array();
  for (const auto& sel : s.selected) {
    j["selected"].push_back({{"sentence", sel.sentence}, {"keyphrase", sel.keyphrase}, {"similarity", sel.similarity}});
  }
  return j;
}

text::SentenceSet sentences_from_json(const json& j) {
  return parsing("sentences", [&] {
    text::SentenceSet s;
    for (const auto& sent : j.at("sentences")) {
      s.sentences.push_back(
          {sent.at("text").get<std::string>(), sent.at("begin").get<std::size_t>(), sent.at("end").get<std::size_t>()});
    }
    for (const auto& sel : j.at("selected")) {
      text::Selection x{sel.at("sentence").get<std::size_t>(), sel.at("keyphrase").get<std::string>(),
                        sel.at("similarity").get<double>()};
      if (x.sentence >= s.sentences.size()) throw DataError("sentences artifact: selection out of range");
      s.selected.push_back(std::move(x));
    }
    return s;
  });
}

json to_json(std::span<const graph::RankedPhrase> ranked) {
  json list = json::array();
  for (const auto& r : ranked) {
    list.push_back({{"rank", r.rank},
                    {"text", r.phrase.text},
                    {"head_token", r.phrase.head_token},
                    {"source_sentence", r.phrase.source_sentence},
                    {"node", r.node},
                    {"cluster", r.cluster},
                    {"connectivity", r.connectivity},
                    {"uniqueness", r.uniqueness},
                    {"semantic", r.semantic},
                    {"pagerank", r.pagerank},
                    {"degree", r.degree},
                    {"betweenness", r.betweenness},
                    {"composite", r.composite}});
  }
  return {{"phrases", list}};
}

std::vector<graph::RankedPhrase> ranked_phrases_from_json(const json& j) {
  return parsing("phrases", [&] {
    std::vector<graph::RankedPhrase> out;
    for (const auto& p : j.at("phrases")) {
      graph::RankedPhrase r;
      r.rank = p.at("rank").get<std::size_t>();
      r.phrase.text = p.at("text").get<std::string>();
      r.phrase.head_token = p.at("head_token").get<std::string>();
      r.phrase.source_sentence = p.at("source_sentence").get<std::size_t>();
      r.node = p.at("node").get<std::size_t>();
      r.cluster = p.at("cluster").get<std::size_t>();
      r.connectivity = p.at("connectivity").get<double>();
      r.uniqueness = p.at("uniqueness").get<double>();
      r.semantic = p.at("semantic").get<double>();
      r.pagerank = p.at("pagerank").get<double>();
      r.degree = p.at("degree").get<double>();
      r.betweenness = p.at("betweenness").get<double>();
      r.composite = p.at("composite").get<double>();
      out.push_back(std::move(r));
    }
    return out;
  });
}

json to_json(const retrieval::RetrievalReport& r) {
  return {{"patent_id", r.patent_id},
          {"query", retrieval::to_json(r.query)},
          {"rendered", retrieval::render(r.query)},
          {"count", r.doc_ids.size()},
          {"doc_ids", r.doc_ids}};
}

json to_json(const retrieval::RankingReport& r) {
  json results = json::array();
  for (const auto& res : r.results) {
    json matches = json::array();
    for (const auto& m : res.matches) matches.push_back({{"phrase", m.phrase}, {"cosine", m.cosine}});
    results.push_back({{"rank", res.rank},
                       {"doc_id", res.doc_id},
                       {"match_count", res.match_count},
                       {"weighted", res.weighted},
                       {"final_score", res.final_score},
                       {"source", std::string(retrieval::to_string(res.source))},
                       {"matches", matches}});
  }
  return {{"patent_id", r.patent_id},
          {"query", retrieval::to_json(r.query)},
          {"count", r.results.size()},
          {"results", results}};
}

// --- pipeline ------------------------------------------------------------

corpus::Corpus open_corpus(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) return corpus::load_corpus(path);
  if (!std::filesystem::exists(path)) throw DataError("corpus not found: " + path.string());
  return corpus::ingest_file(path).corpus;
}

Pipeline::Pipeline(RunConfig config)
    : Pipeline(config, open_corpus(config.corpus),
               ipc::load_descriptions(config.ipc_table.empty() ? default_ipc_table() : config.ipc_table)) {}

Pipeline::Pipeline(RunConfig config, corpus::Corpus corpus, ipc::DescriptionSet table)
    : config_(std::move(config)), corpus_(std::move(corpus)), table_(std::move(table)) {
  validate(config_);
  config_.graph.workers = config_.workers;
  phase1_ = provider(config_.phase1_provider, config_.seed);
  phase3_ = provider(config_.phase3_provider, config_.seed);
}

Pipeline::~Pipeline() = default;

const corpus::PatentDocument& Pipeline::patent(std::string_view id) const { return corpus_.at(id); }

corpus::Corpus Pipeline::candidates(const corpus::PatentDocument& patent) const {
  const auto covered = corpus::filter_by_ipc(corpus_, patent.ipc_codes);
  std::vector<corpus::PatentDocument> docs;
  docs.reserve(covered.size());
  for (const auto& d : covered.documents()) {
    if (d.id != patent.id) docs.push_back(d);
  }
  return corpus::Corpus::from_documents(std::move(docs));
}

KeyphraseArtifact Pipeline::keyphrases(const corpus::PatentDocument& patent) const {
  std::set<corpus::IpcCode> codes(patent.ipc_codes.begin(), patent.ipc_codes.end());
  if (codes.empty()) throw StageError("ipc-knowledge", "patent " + patent.id + " has no IPC codes");
  ipc::Aggregate agg;
  try {
    agg = ipc::aggregate(table_, patent.ipc_codes, {config_.subgroups, true});
  } catch (const std::exception& e) {
    throw StageError("ipc-knowledge", e.what());
  }
  if (agg.missing.size() == codes.size() || agg.descriptions.empty()) {
    throw StageError("ipc-knowledge", "no IPC code of patent " + patent.id + " is in the description table");
  }
  return guarded(Stage::keyphrases, [&] {
    KeyphraseArtifact a;
    a.patent_id = patent.id;
    a.missing = agg.missing;
    std::vector<std::vector<keyphrase::KeyPhrase>> lists;
    for (const auto& d : agg.descriptions) {
      lists.push_back(keyphrase::extract_keyphrases(d.text, d.code.str(), config_.keyphrases));
    }
    a.descriptions = std::move(agg.descriptions);
    a.keyphrases = keyphrase::dedup_union(lists);
    if (a.keyphrases.empty()) throw DataError("no keyphrase candidates in the IPC descriptions");
    return a;
  });
}

text::SentenceSet Pipeline::sentences(const corpus::PatentDocument& patent,
                                      std::span<const keyphrase::KeyPhrase> keyphrases) const {
  return guarded(Stage::sentences, [&] {
    auto all = text::split_sentences(text::patent_text(patent));
    return text::select_sentences(std::move(all), keyphrases, *phase1_, config_.sentence_threshold);
  });
}

PhraseArtifact Pipeline::phrases(const text::SentenceSet& sentences) const {
  return guarded(Stage::phrases, [&] {
    if (sentences.selected.empty()) {
      throw DataError(fmt::format("no sentence is similar enough to a keyphrase (threshold {})",
                                  config_.sentence_threshold));
    }
    auto nps = text::extract_noun_phrases(sentences);
    if (nps.empty()) throw DataError("the selected sentences contain no noun phrase");
    std::vector<std::string> texts;
    for (const auto& np : nps) texts.push_back(np.text);
    auto vectors = phase1_->embed_batch(texts);
    std::vector<graph::PhraseNode> nodes;
    for (std::size_t i = 0; i < nps.size(); ++i) nodes.push_back({std::move(nps[i]), std::move(vectors[i])});
    PhraseArtifact out;
    out.graph = graph::build_graph(std::move(nodes), config_.graph.edge_threshold, config_.graph.min_cluster_size);
    out.ranked = graph::rank_phrases(out.graph, config_.graph);
    return out;
  });
}

retrieval::StructuredQuery Pipeline::query(std::span<const graph::RankedPhrase> ranked,
                                           std::optional<std::size_t> k) const {
  return guarded(Stage::query, [&] {
    const std::size_t want = k.value_or(config_.k);
    if (want > ranked.size()) {
      throw DataError(fmt::format("k = {} but only {} ranked phrases are available", want, ranked.size()));
    }
    auto q = retrieval::formulate_query(ranked, want, config_.sections, config_.match_mode, config_.k_bounds);
    q.min_phrase_matches = config_.min_phrase_matches;
    return q;
  });
}

retrieval::RetrievalReport Pipeline::retrieve(const corpus::PatentDocument& patent,
                                              const retrieval::StructuredQuery& query) const {
  return guarded(Stage::retrieve, [&] {
    const auto sd = candidates(patent);
    return retrieval::RetrievalReport{patent.id, query, retrieval::search(sd, query)};
  });
}

retrieval::RankingReport Pipeline::rank(const retrieval::RetrievalReport& retrieved) const {
  return guarded(Stage::rank, [&] {
    retrieval::RankingReport out{retrieved.patent_id, retrieved.query, {}};
    if (!retrieved.doc_ids.empty()) {
      out.results = retrieval::rank_results(corpus_, retrieved.doc_ids, retrieved.query.phrases, *phase3_,
                                            config_.ranking);
    }
    return out;
  });
}

evaluation::EvaluationReport Pipeline::evaluate(const corpus::PatentDocument& patent,
                                                std::span<const graph::RankedPhrase> ranked,
                                                const retrieval::RankingReport& ranking) const {
  const auto sd = candidates(patent);
  const auto& relevant = patent.cited_by_examiner;
  auto report = evaluation::evaluate_ranking(patent.id, sd.size(), ranking.results, relevant, config_.recall_at);

  evaluation::SweepOptions sweep;
  sweep.k_min = config_.k_bounds.min;
  sweep.k_max = std::min(config_.k_bounds.max, ranked.size());
  sweep.sections = config_.sections;
  sweep.match_mode = config_.match_mode;
  sweep.min_phrase_matches = config_.min_phrase_matches;
  sweep.bounds = config_.k_bounds;
  sweep.workers = config_.workers;
  if (sweep.k_min <= sweep.k_max) report.per_k_rows = evaluation::k_sweep(sd, ranked, relevant, sweep);
  report.monotone = evaluation::retrieved_monotone(report.per_k_rows);

  if (!config_.baselines.empty()) {
    std::vector<evaluation::BaselineList> lists;
    for (const auto& path : config_.baselines) lists.push_back(evaluation::read_baseline(path));
    report.comparison = evaluation::compare_baselines(report, lists, relevant);
  }
  return report;
}

ReportArtifact Pipeline::report(const corpus::PatentDocument& patent, std::span<const graph::RankedPhrase> ranked,
                                const retrieval::RankingReport& ranking) const {
  return guarded(Stage::report, [&] {
    ReportArtifact out;
    std::vector<std::string> citations = patent.cited_by_examiner;
    std::sort(citations.begin(), citations.end());
    json& j = out.json;
    j["patent_id"] = patent.id;
    j["query"] = {{"k", ranking.query.k},
                  {"provenance", std::string(retrieval::to_string(ranking.query.provenance))},
                  {"rendered", retrieval::render(ranking.query)}};
    j["ranked_size"] = ranking.results.size();
    j["citations"] = citations;
    if (citations.empty()) {
      j["dataset_size"] = candidates(patent).size();
      j["recall"] = nullptr;
      j["evaluation"] = nullptr;
      out.text = fmt::format("Patent {}  |S_d| = {}\nRanked documents: {}\nNo examiner citations; recall not defined.\n",
                             patent.id, j["dataset_size"].get<std::size_t>(), ranking.results.size());
      return out;
    }
    const auto eval = evaluate(patent, ranked, ranking);
    std::vector<std::string> ids;
    for (const auto& r : ranking.results) ids.push_back(r.doc_id);
    j["dataset_size"] = eval.dataset_size;
    j["recall"] = evaluation::recall(ids, citations);
    j["evaluation"] = evaluation::to_json(eval);
    std::ostringstream text;
    evaluation::write_text(eval, text);
    out.text = text.str();
    return out;
  });
}

}  // namespace priorart::app
