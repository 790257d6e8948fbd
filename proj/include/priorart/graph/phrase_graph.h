#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "priorart/embedding/vector.h"
#include "priorart/error.h"
#include "priorart/graph/hdbscan.h"
#include "priorart/text/noun_phrases.h"

namespace priorart::graph {

using embedding::EmbeddingVector;

struct PhraseNode {
  text::NounPhrase phrase;
  EmbeddingVector embedding;
};

struct Edge {
  std::size_t a = 0, b = 0;  // a < b
  double similarity = 0;
};

// Sorted neighbour lists, no self loops, symmetric.
using Adjacency = std::vector<std::vector<std::size_t>>;

struct PhraseGraph {
  std::vector<PhraseNode> nodes;
  std::vector<Edge> edges;  // sorted by (a, b)
  double edge_threshold = 0;
  Partition clusters;
  std::vector<EmbeddingVector> cluster_centroids;  // parallel to clusters.clusters
  EmbeddingVector graph_centroid;

  Adjacency adjacency() const;
};

// Edges wherever cosine similarity is strictly above edge_threshold.
// Throws std::invalid_argument on an empty node list, a zero embedding or a
// partition that does not cover the nodes exactly.
PhraseGraph build_graph(std::vector<PhraseNode> nodes, Partition clusters, double edge_threshold);
// Clusters the embeddings first.
PhraseGraph build_graph(std::vector<PhraseNode> nodes, double edge_threshold, std::size_t min_cluster_size);

Adjacency adjacency_from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

// (x - min) / (max - min); all zeros when the values are constant.
std::vector<double> min_max(const std::vector<double>& values);

// Higher means closer to the own-cluster and graph centroids. Distances are
// min-max normalized across nodes; a constant distance normalizes to 0.
std::vector<double> connectivity_scores(const PhraseGraph& graph, double alpha_c);

// Higher means more distinctive. A singleton cluster has intra similarity 0;
// with a single cluster the inter-cluster similarity is 0. A zero centroid
// has similarity 0 with everything.
std::vector<double> uniqueness_scores(const PhraseGraph& graph, double alpha_u);

struct PageRankOptions {
  double damping = 0.85;
  double tolerance = 1e-9;  // on the L1 change between iterates
  std::size_t max_iterations = 200;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> last) : Error(what), last_(std::move(last)) {}
  const std::vector<double>& last_iterate() const noexcept { return last_; }

 private:
  std::vector<double> last_;
};

// Power iteration on the undirected graph; isolated nodes spread their mass
// uniformly. At damping 1 the walk is made lazy (half the mass stays put),
// which has the same stationary distribution but also converges on
// bipartite graphs. Throws ConvergenceError after max_iterations and
// std::invalid_argument on an empty graph or damping outside (0, 1].
std::vector<double> pagerank(const Adjacency& adjacency, const PageRankOptions& options = {});

// deg / max deg; all zero when there are no edges.
std::vector<double> degree_centrality(const Adjacency& adjacency);

// Unweighted betweenness, each unordered pair counted once. Sources are
// spread over `workers` threads; the result does not depend on the count.
std::vector<double> betweenness_centrality(const Adjacency& adjacency, std::size_t workers = 1);

struct RankWeights {
  double alpha = 0.25;  // pagerank
  double beta = 0.25;   // degree
  double delta = 0.2;   // betweenness; semantic gets the rest
};

struct RankedPhrase {
  text::NounPhrase phrase;
  std::size_t node = 0;  // index in the graph
  std::size_t cluster = 0;
  double connectivity = 0, uniqueness = 0, semantic = 0;
  double pagerank = 0, degree = 0, betweenness = 0;
  double composite = 0;
  std::size_t rank = 0;  // 1-based
};

// Fills composite and rank from the component fields and sorts by composite
// descending, then semantic descending, then phrase text. Components are
// min-max normalized across the list first. Throws std::invalid_argument on
// negative weights or weights summing above 1.
std::vector<RankedPhrase> composite_rank(std::vector<RankedPhrase> phrases, const RankWeights& weights);

struct GraphOptions {
  std::size_t min_cluster_size = 3;
  double edge_threshold = 0.6;
  double alpha_c = 0.5;
  double alpha_u = 0.5;
  RankWeights weights;
  PageRankOptions pagerank;
  std::size_t workers = 1;
};

// Scores every node of an already built graph and ranks them.
std::vector<RankedPhrase> rank_phrases(const PhraseGraph& graph, const GraphOptions& options);

// JSON dump of nodes (text, cluster), edges and weights for visualization.
void write_graph_dump(const PhraseGraph& graph, std::ostream& out);

}  // namespace priorart::graph
