#include "priorart/graph/hdbscan.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace priorart::graph {
namespace {

struct WeightedEdge {
  double w;
  std::size_t a, b;
};

// Node of the merge hierarchy: leaves are points, internal nodes join two or
// more components at one distance.
struct TreeNode {
  std::vector<std::size_t> children;
  double distance = 0;
  std::size_t size = 1;
};

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
};

double lambda_of(double distance) { return 1.0 / std::max(distance, 1e-12); }

std::vector<WeightedEdge> minimum_spanning_tree(const DistanceMatrix& mreach) {
  const std::size_t n = mreach.size();
  std::vector<WeightedEdge> edges;
  std::vector<bool> in_tree(n, false);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> from(n, 0);
  std::size_t current = 0;
  in_tree[0] = true;
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t next = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      if (mreach(current, j) < best[j]) {
        best[j] = mreach(current, j);
        from[j] = current;
      }
      if (next == n || best[j] < best[next]) next = j;
    }
    in_tree[next] = true;
    edges.push_back({best[next], std::min(from[next], next), std::max(from[next], next)});
    current = next;
  }
  return edges;
}

// Builds the merge tree; returns nodes with the root last. All edges of one
// weight are applied together, so a level can join more than two
// components and the result does not depend on the order of tied edges.
std::vector<TreeNode> merge_tree(std::size_t n, std::vector<WeightedEdge> edges) {
  std::sort(edges.begin(), edges.end(), [](const WeightedEdge& x, const WeightedEdge& y) { return x.w < y.w; });
  std::vector<TreeNode> nodes(n);
  DisjointSet sets(n);
  std::vector<std::size_t> node_of(n);  // set root -> tree node
  std::iota(node_of.begin(), node_of.end(), 0);

  for (std::size_t i = 0; i < edges.size();) {
    std::size_t j = i;
    while (j < edges.size() && edges[j].w == edges[i].w) ++j;
    std::vector<std::size_t> before;
    for (std::size_t k = i; k < j; ++k) {
      before.push_back(sets.find(edges[k].a));
      before.push_back(sets.find(edges[k].b));
    }
    std::sort(before.begin(), before.end());
    before.erase(std::unique(before.begin(), before.end()), before.end());
    std::map<std::size_t, std::size_t> old_node;
    for (auto r : before) old_node[r] = node_of[r];
    for (std::size_t k = i; k < j; ++k) {
      const auto ra = sets.find(edges[k].a), rb = sets.find(edges[k].b);
      if (ra != rb) sets.parent[std::max(ra, rb)] = std::min(ra, rb);
    }
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (auto r : before) groups[sets.find(r)].push_back(old_node[r]);
    for (auto& [root, children] : groups) {
      TreeNode node;
      node.distance = edges[i].w;
      node.size = 0;
      for (auto c : children) node.size += nodes[c].size;
      node.children = std::move(children);
      node_of[root] = nodes.size();
      nodes.push_back(std::move(node));
    }
    i = j;
  }
  return nodes;
}

struct CondensedCluster {
  std::size_t parent = 0;  // index into clusters; root is its own parent
  double birth = 0;        // lambda at which the cluster appears
  double stability = 0;
  std::vector<std::size_t> children;
  std::vector<std::size_t> points;  // points that leave the tree from this cluster
};

void collect_leaves(const std::vector<TreeNode>& nodes, std::size_t node, std::size_t n, std::vector<std::size_t>& out) {
  std::vector<std::size_t> stack = {node};
  while (!stack.empty()) {
    const auto x = stack.back();
    stack.pop_back();
    if (x < n) {
      out.push_back(x);
    } else {
      for (auto c : nodes[x].children) stack.push_back(c);
    }
  }
}

std::vector<CondensedCluster> condense(const std::vector<TreeNode>& nodes, std::size_t n, std::size_t mcs) {
  std::vector<CondensedCluster> clusters(1);
  clusters[0].parent = 0;
  // (tree node, cluster) pairs still to expand.
  std::vector<std::pair<std::size_t, std::size_t>> work = {{nodes.size() - 1, 0}};
  while (!work.empty()) {
    const auto [node, cluster] = work.back();
    work.pop_back();
    if (node < n) {  // a lone point reached while its cluster is still alive
      clusters[cluster].points.push_back(node);
      continue;
    }
    const double lambda = lambda_of(nodes[node].distance);
    std::vector<std::size_t> large, small;
    for (auto c : nodes[node].children) (nodes[c].size >= mcs ? large : small).push_back(c);

    auto fall_out = [&](std::size_t child) {
      std::vector<std::size_t> pts;
      collect_leaves(nodes, child, n, pts);
      clusters[cluster].stability += static_cast<double>(pts.size()) * (lambda - clusters[cluster].birth);
      clusters[cluster].points.insert(clusters[cluster].points.end(), pts.begin(), pts.end());
    };
    for (auto c : small) fall_out(c);

    if (large.size() == 1) {
      work.emplace_back(large[0], cluster);
    } else if (large.size() >= 2) {
      for (auto c : large) {
        clusters[cluster].stability += static_cast<double>(nodes[c].size) * (lambda - clusters[cluster].birth);
        CondensedCluster child;
        child.parent = cluster;
        child.birth = lambda;
        clusters[cluster].children.push_back(clusters.size());
        clusters.push_back(child);
        work.emplace_back(c, clusters.size() - 1);
      }
    }
  }
  return clusters;
}

}  // namespace

DistanceMatrix normalized_euclidean(std::span<const embedding::EmbeddingVector> vectors) {
  std::vector<std::vector<double>> unit;
  for (const auto& v : vectors) {
    const double norm = v.norm();
    std::vector<double> u(v.values());
    if (norm > 0) {
      for (auto& x : u) x /= norm;
    }
    unit.push_back(std::move(u));
  }
  DistanceMatrix d(vectors.size());
  for (std::size_t i = 0; i < unit.size(); ++i) {
    for (std::size_t j = i + 1; j < unit.size(); ++j) {
      if (unit[i].size() != unit[j].size()) throw std::invalid_argument("cluster_phrases: mixed dimensions");
      double ss = 0;
      for (std::size_t k = 0; k < unit[i].size(); ++k) ss += (unit[i][k] - unit[j][k]) * (unit[i][k] - unit[j][k]);
      d.set(i, j, std::sqrt(ss));
    }
  }
  return d;
}

std::vector<int> hdbscan_labels(const DistanceMatrix& distances, std::size_t min_cluster_size) {
  if (min_cluster_size < 2) throw std::invalid_argument("min_cluster_size must be at least 2");
  const std::size_t n = distances.size();
  std::vector<int> labels(n, kNoise);
  if (n < min_cluster_size) return labels;

  std::vector<double> core(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(n);
    for (std::size_t j = 0; j < n; ++j) row[j] = distances(i, j);
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(min_cluster_size - 1), row.end());
    core[i] = row[min_cluster_size - 1];
  }
  DistanceMatrix mreach(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) mreach.set(i, j, std::max({core[i], core[j], distances(i, j)}));
  }

  const auto tree = merge_tree(n, minimum_spanning_tree(mreach));
  auto clusters = condense(tree, n, min_cluster_size);

  // Excess of mass, children before parents (children always have larger
  // indices than their parent).
  std::vector<double> score(clusters.size());
  std::vector<bool> selected(clusters.size(), false);
  for (std::size_t c = clusters.size(); c-- > 1;) {
    double child_sum = 0;
    for (auto k : clusters[c].children) child_sum += score[k];
    if (clusters[c].children.empty() || clusters[c].stability >= child_sum) {
      selected[c] = true;
      score[c] = clusters[c].stability;
    } else {
      score[c] = child_sum;
    }
  }
  // A selected ancestor absorbs its descendants.
  for (std::size_t c = 1; c < clusters.size(); ++c) {
    for (std::size_t p = clusters[c].parent; p != 0; p = clusters[p].parent) {
      if (selected[p]) {
        selected[c] = false;
        break;
      }
    }
  }

  std::vector<std::size_t> owner(clusters.size(), 0);  // selected ancestor-or-self, 0 if none
  for (std::size_t c = 1; c < clusters.size(); ++c) {
    owner[c] = selected[c] ? c : owner[clusters[c].parent];
  }
  std::vector<std::size_t> point_owner(n, 0);
  for (std::size_t c = 1; c < clusters.size(); ++c) {
    for (auto p : clusters[c].points) point_owner[p] = owner[c];
  }

  // Number clusters by their smallest member.
  std::map<std::size_t, int> ids;
  for (std::size_t p = 0; p < n; ++p) {
    if (point_owner[p] == 0) continue;
    auto [it, inserted] = ids.emplace(point_owner[p], static_cast<int>(ids.size()));
    labels[p] = it->second;
  }
  return labels;
}

Partition partition_from_labels(std::span<const int> labels) {
  Partition out;
  out.assignment.resize(labels.size());
  std::map<int, std::size_t> cluster_of;
  for (std::size_t p = 0; p < labels.size(); ++p) {
    std::size_t c;
    if (labels[p] == kNoise) {
      c = out.clusters.size();
      out.clusters.emplace_back();
    } else {
      auto [it, inserted] = cluster_of.emplace(labels[p], out.clusters.size());
      if (inserted) out.clusters.emplace_back();
      c = it->second;
    }
    out.clusters[c].push_back(p);
    out.assignment[p] = c;
  }
  return out;
}

Partition cluster_phrases(std::span<const embedding::EmbeddingVector> embeddings, std::size_t min_cluster_size) {
  if (embeddings.empty()) throw std::invalid_argument("cluster_phrases: no embeddings");
  if (min_cluster_size < 2) throw std::invalid_argument("min_cluster_size must be at least 2");
  const auto d = normalized_euclidean(embeddings);
  const std::size_t n = d.size();
  if (n >= min_cluster_size) {
    bool identical = true;
    for (std::size_t i = 1; i < n && identical; ++i) identical = d(0, i) == 0.0;
    if (identical) return partition_from_labels(std::vector<int>(n, 0));
  }
  return partition_from_labels(hdbscan_labels(d, min_cluster_size));
}

}  // namespace priorart::graph
