#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "priorart/embedding/vector.h"

namespace priorart::graph {

// Symmetric n x n distance matrix, row-major.
class DistanceMatrix {
 public:
  explicit DistanceMatrix(std::size_t n) : n_(n), d_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return d_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v) noexcept {
    d_[i * n_ + j] = v;
    d_[j * n_ + i] = v;
  }

 private:
  std::size_t n_;
  std::vector<double> d_;
};

// Euclidean distances between the L2-normalized vectors.
DistanceMatrix normalized_euclidean(std::span<const embedding::EmbeddingVector> vectors);

inline constexpr int kNoise = -1;

// Hierarchical density-based clustering with min_samples = min_cluster_size.
//
// Core distance is the distance to the k-th nearest point counting the point
// itself (k = min_cluster_size). Mutual reachability feeds a minimum spanning
// tree; edges of equal weight merge together, so one level of the hierarchy
// can join more than two components and the labels do not depend on input
// order beyond numbering. The condensed tree keeps clusters of at
// least min_cluster_size points; flat clusters are chosen by excess of mass
// with the root excluded and ties going to the parent.
//
// Returns one label per point: cluster ids 0.. numbered by smallest member
// index, or kNoise.
std::vector<int> hdbscan_labels(const DistanceMatrix& distances, std::size_t min_cluster_size);

struct Partition {
  std::vector<std::vector<std::size_t>> clusters;  // ordered by smallest member
  std::vector<std::size_t> assignment;             // point -> cluster index
};

// Every point ends in exactly one cluster. Noise points become singletons;
// fewer points than min_cluster_size give all singletons; a set of identical
// points forms one cluster. Throws std::invalid_argument when
// min_cluster_size < 2 or the list is empty.
Partition cluster_phrases(std::span<const embedding::EmbeddingVector> embeddings, std::size_t min_cluster_size);
Partition partition_from_labels(std::span<const int> labels);

}  // namespace priorart::graph
