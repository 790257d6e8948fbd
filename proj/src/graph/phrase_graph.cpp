#include "priorart/graph/phrase_graph.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace priorart::graph {
namespace {

double euclidean(const EmbeddingVector& a, const EmbeddingVector& b) {
  double ss = 0;
  for (std::size_t k = 0; k < a.dim(); ++k) ss += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(ss);
}

// Cosine that treats a zero vector as unrelated instead of failing.
double cosine_or_zero(const EmbeddingVector& a, const EmbeddingVector& b) {
  return a.is_zero() || b.is_zero() ? 0.0 : embedding::cosine(a, b);
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

std::vector<double> min_max(const std::vector<double>& values) {
  if (values.empty()) return {};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  std::vector<double> out(values.size(), 0.0);
  if (*hi - *lo <= 0) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - *lo) / (*hi - *lo);
  return out;
}

Adjacency PhraseGraph::adjacency() const {
  Adjacency adj(nodes.size());
  for (const auto& e : edges) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

Adjacency adjacency_from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  Adjacency adj(n);
  for (const auto& [a, b] : edges) {
    if (a >= n || b >= n || a == b) throw std::invalid_argument("adjacency_from_edges: bad edge");
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

PhraseGraph build_graph(std::vector<PhraseNode> nodes, Partition clusters, double edge_threshold) {
  if (nodes.empty()) throw std::invalid_argument("build_graph: no nodes");
  const std::size_t n = nodes.size();
  for (const auto& node : nodes) {
    if (node.embedding.is_zero()) throw std::invalid_argument("build_graph: zero embedding for '" + node.phrase.text + "'");
  }
  if (clusters.assignment.size() != n) throw std::invalid_argument("build_graph: partition size mismatch");
  std::vector<int> seen(n, 0);
  for (std::size_t c = 0; c < clusters.clusters.size(); ++c) {
    if (clusters.clusters[c].empty()) throw std::invalid_argument("build_graph: empty cluster");
    for (auto i : clusters.clusters[c]) {
      if (i >= n || seen[i]++ || clusters.assignment[i] != c) throw std::invalid_argument("build_graph: not a partition");
    }
  }

  PhraseGraph g;
  g.edge_threshold = edge_threshold;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = embedding::cosine(nodes[i].embedding, nodes[j].embedding);
      if (s > edge_threshold) g.edges.push_back({i, j, s});
    }
  }
  for (const auto& members : clusters.clusters) {
    std::vector<EmbeddingVector> vs;
    for (auto i : members) vs.push_back(nodes[i].embedding);
    g.cluster_centroids.push_back(embedding::centroid(vs));
  }
  std::vector<EmbeddingVector> all;
  for (const auto& node : nodes) all.push_back(node.embedding);
  g.graph_centroid = embedding::centroid(all);
  g.nodes = std::move(nodes);
  g.clusters = std::move(clusters);
  return g;
}

PhraseGraph build_graph(std::vector<PhraseNode> nodes, double edge_threshold, std::size_t min_cluster_size) {
  std::vector<EmbeddingVector> vs;
  for (const auto& node : nodes) vs.push_back(node.embedding);
  auto partition = cluster_phrases(vs, min_cluster_size);
  return build_graph(std::move(nodes), std::move(partition), edge_threshold);
}

std::vector<double> connectivity_scores(const PhraseGraph& graph, double alpha_c) {
  if (alpha_c < 0 || alpha_c > 1) throw std::invalid_argument("alpha_c must be in [0, 1]");
  const std::size_t n = graph.nodes.size();
  std::vector<double> cc(n), cg(n);
  for (std::size_t i = 0; i < n; ++i) {
    cc[i] = euclidean(graph.nodes[i].embedding, graph.cluster_centroids[graph.clusters.assignment[i]]);
    cg[i] = euclidean(graph.nodes[i].embedding, graph.graph_centroid);
  }
  const auto cc_n = min_max(cc), cg_n = min_max(cg);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = alpha_c * (1 - cc_n[i]) + (1 - alpha_c) * (1 - cg_n[i]);
  return out;
}

std::vector<double> uniqueness_scores(const PhraseGraph& graph, double alpha_u) {
  if (alpha_u < 0 || alpha_u > 1) throw std::invalid_argument("alpha_u must be in [0, 1]");
  const std::size_t n = graph.nodes.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto own = graph.clusters.assignment[i];
    double uc = 0;
    bool has_peer = false;
    for (auto j : graph.clusters.clusters[own]) {
      if (j == i) continue;
      const double s = embedding::cosine(graph.nodes[i].embedding, graph.nodes[j].embedding);
      uc = has_peer ? std::min(uc, s) : s;
      has_peer = true;
    }
    double ug = 0;
    bool has_other = false;
    for (std::size_t c = 0; c < graph.cluster_centroids.size(); ++c) {
      if (c == own) continue;
      const double s = cosine_or_zero(graph.nodes[i].embedding, graph.cluster_centroids[c]);
      ug = has_other ? std::min(ug, s) : s;
      has_other = true;
    }
    out[i] = alpha_u * (1 - clamp01(uc)) + (1 - alpha_u) * (1 - clamp01(ug));
  }
  return out;
}

std::vector<double> pagerank(const Adjacency& adj, const PageRankOptions& options) {
  const std::size_t n = adj.size();
  if (n == 0) throw std::invalid_argument("pagerank: empty graph");
  if (!(options.damping > 0 && options.damping <= 1)) throw std::invalid_argument("pagerank: damping must be in (0, 1]");
  const double d = options.damping;
  const double nd = static_cast<double>(n);
  const bool lazy = d == 1.0;

  std::vector<double> p(n, 1.0 / nd), next(n);
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    double dangling = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (adj[k].empty()) dangling += p[k];
    }
    for (std::size_t i = 0; i < n; ++i) {
      double in = 0;
      for (auto k : adj[i]) in += p[k] / static_cast<double>(adj[k].size());
      next[i] = (1 - d) / nd + d * (in + dangling / nd);
      if (lazy) next[i] = 0.5 * (p[i] + next[i]);
    }
    const double total = std::accumulate(next.begin(), next.end(), 0.0);
    double change = 0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] /= total;
      change += std::abs(next[i] - p[i]);
    }
    p.swap(next);
    if (change < options.tolerance) return p;
  }
  throw ConvergenceError("pagerank did not converge in " + std::to_string(options.max_iterations) + " iterations",
                         std::move(p));
}

std::vector<double> degree_centrality(const Adjacency& adj) {
  std::size_t max_deg = 0;
  for (const auto& list : adj) max_deg = std::max(max_deg, list.size());
  std::vector<double> out(adj.size(), 0.0);
  if (max_deg == 0) return out;
  for (std::size_t i = 0; i < adj.size(); ++i) {
    out[i] = static_cast<double>(adj[i].size()) / static_cast<double>(max_deg);
  }
  return out;
}

}  // namespace priorart::graph
