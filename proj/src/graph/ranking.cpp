#include <algorithm>
#include <cstdint>
#include <exception>
#include <deque>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "priorart/graph/phrase_graph.h"

namespace priorart::graph {
namespace {

struct BfsTree {
  std::vector<std::uint64_t> sigma;  // shortest-path counts
  std::vector<long> dist;
  std::vector<std::size_t> order;    // non-decreasing distance
};

// Throws Overflow when a path count does not fit.
struct Overflow {};

BfsTree bfs(const Adjacency& adj, std::size_t source) {
  const std::size_t n = adj.size();
  BfsTree t{std::vector<std::uint64_t>(n, 0), std::vector<long>(n, -1), {}};
  std::deque<std::size_t> queue = {source};
  t.sigma[source] = 1;
  t.dist[source] = 0;
  while (!queue.empty()) {
    const auto v = queue.front();
    queue.pop_front();
    t.order.push_back(v);
    for (auto w : adj[v]) {
      if (t.dist[w] < 0) {
        t.dist[w] = t.dist[v] + 1;
        queue.push_back(w);
      }
      if (t.dist[w] == t.dist[v] + 1 && __builtin_add_overflow(t.sigma[w], t.sigma[v], &t.sigma[w])) {
        throw Overflow{};
      }
    }
  }
  return t;
}

// Non-negative fraction in lowest terms; every operation checks for overflow.
struct Fraction {
  __extension__ typedef __int128 Int;
  Int num = 0, den = 1;

  static Int mul(Int a, Int b) {
    Int r;
    if (__builtin_mul_overflow(a, b, &r)) throw Overflow{};
    return r;
  }
  static Int gcd(Int a, Int b) {
    while (b != 0) {
      const Int t = a % b;
      a = b;
      b = t;
    }
    return a;
  }
  static Fraction make(Int num, Int den) {
    const Int g = gcd(num, den);
    return {num / g, den / g};
  }
  Fraction operator+(const Fraction& o) const {
    const Int g = gcd(den, o.den);
    const Int lhs = mul(num, o.den / g);
    const Int rhs = mul(o.num, den / g);
    Int sum;
    if (__builtin_add_overflow(lhs, rhs, &sum)) throw Overflow{};
    return make(sum, mul(den / g, o.den));
  }
  Fraction operator*(const Fraction& o) const {
    const Fraction a = make(num, o.den), b = make(o.num, den);
    return {mul(a.num, b.num), mul(a.den, b.den)};
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// Dependency of `source` on every node (one Brandes pass), exact.
std::vector<Fraction> exact_dependency(const Adjacency& adj, std::size_t source) {
  const auto t = bfs(adj, source);
  std::vector<Fraction> delta(adj.size());
  for (auto it = t.order.rbegin(); it != t.order.rend(); ++it) {
    const auto w = *it;
    const Fraction carry = delta[w] + Fraction{1, 1};
    for (auto v : adj[w]) {
      if (t.dist[v] == t.dist[w] - 1) {
        delta[v] = delta[v] + Fraction::make(t.sigma[v], t.sigma[w]) * carry;
      }
    }
  }
  delta[source] = {};
  return delta;
}

// The same pass in doubles, for graphs whose path counts outgrow the exact one.
std::vector<double> float_dependency(const Adjacency& adj, std::size_t source) {
  const std::size_t n = adj.size();
  std::vector<double> sigma(n, 0.0), delta(n, 0.0);
  std::vector<long> dist(n, -1);
  std::vector<std::size_t> order;
  std::deque<std::size_t> queue = {source};
  sigma[source] = 1;
  dist[source] = 0;
  while (!queue.empty()) {
    const auto v = queue.front();
    queue.pop_front();
    order.push_back(v);
    for (auto w : adj[v]) {
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
      if (dist[w] == dist[v] + 1) sigma[w] += sigma[v];
    }
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto w = *it;
    for (auto v : adj[w]) {
      if (dist[v] == dist[w] - 1) delta[v] += sigma[v] / sigma[w] * (1 + delta[w]);
    }
  }
  delta[source] = 0;
  return delta;
}

// Runs f(s) for every source over `workers` threads. An exception in any
// worker is rethrown after all of them finish.
template <typename F>
void for_each_source(std::size_t n, std::size_t workers, F f) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t s = 0; s < n; ++s) f(s);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t s = w; s < n; s += workers) f(s);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::vector<double> betweenness_centrality(const Adjacency& adj, std::size_t workers) {
  const std::size_t n = adj.size();
  // Exact rational accumulation, rounded only when converting the final
  // fraction. Sums are taken in source order either way, which keeps the
  // result independent of the worker count.
  try {
    std::vector<std::vector<Fraction>> per_source(n);
    for_each_source(n, workers, [&](std::size_t s) { per_source[s] = exact_dependency(adj, s); });
    std::vector<Fraction> total(n);
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t v = 0; v < n; ++v) total[v] = total[v] + per_source[s][v];
    }
    std::vector<double> out(n);
    for (std::size_t v = 0; v < n; ++v) out[v] = (total[v] * Fraction{1, 2}).value();
    return out;
  } catch (const Overflow&) {
  }

  std::vector<std::vector<double>> per_source(n);
  for_each_source(n, workers, [&](std::size_t s) { per_source[s] = float_dependency(adj, s); });
  std::vector<double> out(n, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t v = 0; v < n; ++v) out[v] += per_source[s][v];
  }
  for (auto& x : out) x /= 2;
  return out;
}

std::vector<RankedPhrase> composite_rank(std::vector<RankedPhrase> phrases, const RankWeights& w) {
  if (w.alpha < 0 || w.beta < 0 || w.delta < 0 || w.alpha + w.beta + w.delta > 1 + 1e-12) {
    throw std::invalid_argument("composite weights must be non-negative with alpha + beta + delta <= 1");
  }
  auto column = [&](double RankedPhrase::*field) {
    std::vector<double> v;
    for (const auto& p : phrases) v.push_back(p.*field);
    return min_max(v);
  };
  const auto p = column(&RankedPhrase::pagerank);
  const auto d = column(&RankedPhrase::degree);
  const auto b = column(&RankedPhrase::betweenness);
  const auto s = column(&RankedPhrase::semantic);
  const double rest = std::max(0.0, 1 - w.alpha - w.beta - w.delta);
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    phrases[i].composite = w.alpha * p[i] + w.beta * d[i] + w.delta * b[i] + rest * s[i];
  }
  std::stable_sort(phrases.begin(), phrases.end(), [](const RankedPhrase& x, const RankedPhrase& y) {
    if (x.composite != y.composite) return x.composite > y.composite;
    if (x.semantic != y.semantic) return x.semantic > y.semantic;
    return x.phrase.text < y.phrase.text;
  });
  for (std::size_t i = 0; i < phrases.size(); ++i) phrases[i].rank = i + 1;
  return phrases;
}

std::vector<RankedPhrase> rank_phrases(const PhraseGraph& graph, const GraphOptions& options) {
  const auto adj = graph.adjacency();
  const auto conn = connectivity_scores(graph, options.alpha_c);
  const auto uniq = uniqueness_scores(graph, options.alpha_u);
  const auto pr = pagerank(adj, options.pagerank);
  const auto deg = degree_centrality(adj);
  const auto btw = betweenness_centrality(adj, options.workers);
  std::vector<RankedPhrase> out;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    RankedPhrase r;
    r.phrase = graph.nodes[i].phrase;
    r.node = i;
    r.cluster = graph.clusters.assignment[i];
    r.connectivity = conn[i];
    r.uniqueness = uniq[i];
    r.semantic = (conn[i] + uniq[i]) / 2;
    r.pagerank = pr[i];
    r.degree = deg[i];
    r.betweenness = btw[i];
    out.push_back(std::move(r));
  }
  return composite_rank(std::move(out), options.weights);
}

void write_graph_dump(const PhraseGraph& graph, std::ostream& out) {
  nlohmann::ordered_json j;
  j["edge_threshold"] = graph.edge_threshold;
  j["nodes"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    j["nodes"].push_back({{"id", i}, {"text", graph.nodes[i].phrase.text}, {"cluster", graph.clusters.assignment[i]}});
  }
  j["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : graph.edges) j["edges"].push_back({{"source", e.a}, {"target", e.b}, {"weight", e.similarity}});
  j["clusters"] = graph.clusters.clusters;
  out << j.dump(2) << '\n';
}

}  // namespace priorart::graph
