#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "priorart/graph/hdbscan.h"
#include "priorart/graph/phrase_graph.h"
#include "support/oracles.h"

using namespace priorart::graph;
using priorart::embedding::EmbeddingVector;
using namespace priorart::testing;

namespace {

DistanceMatrix plain_euclidean(const std::vector<std::vector<double>>& pts) {
  DistanceMatrix d(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      double ss = 0;
      for (std::size_t k = 0; k < pts[i].size(); ++k) ss += (pts[i][k] - pts[j][k]) * (pts[i][k] - pts[j][k]);
      d.set(i, j, std::sqrt(ss));
    }
  }
  return d;
}

// --- Threshold-sweep clustering oracle -------------------------------------
// The hierarchy is rebuilt from scratch as connected components of the full
// mutual-reachability graph at every distinct distance, then condensed and
// selected recursively.

struct SweepCluster {
  std::set<std::size_t> members;
  double birth;
  double stability = 0;
  std::vector<std::size_t> children;
  std::vector<std::size_t> fallen;  // points leaving directly from here
};

std::vector<std::set<std::size_t>> components(const DistanceMatrix& m, const std::set<std::size_t>& pts, double below) {
  std::vector<std::set<std::size_t>> out;
  std::set<std::size_t> left = pts;
  while (!left.empty()) {
    std::set<std::size_t> comp = {*left.begin()};
    std::vector<std::size_t> stack = {*left.begin()};
    left.erase(left.begin());
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      for (auto it = left.begin(); it != left.end();) {
        if (m(v, *it) < below) {
          comp.insert(*it);
          stack.push_back(*it);
          it = left.erase(it);
        } else {
          ++it;
        }
      }
    }
    out.push_back(comp);
  }
  return out;
}

std::vector<int> sweep_oracle(const DistanceMatrix& d, std::size_t mcs) {
  const std::size_t n = d.size();
  std::vector<int> labels(n, -1);
  if (n < mcs) return labels;
  std::vector<double> core(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row;
    for (std::size_t j = 0; j < n; ++j) row.push_back(d(i, j));
    std::sort(row.begin(), row.end());
    core[i] = row[mcs - 1];
  }
  DistanceMatrix m(n);
  std::set<double> levels;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      m.set(i, j, std::max({core[i], core[j], d(i, j)}));
      levels.insert(m(i, j));
    }
  }
  auto lam = [](double w) { return 1.0 / std::max(w, 1e-12); };

  std::vector<SweepCluster> cl;
  std::set<std::size_t> all;
  for (std::size_t i = 0; i < n; ++i) all.insert(i);
  cl.push_back({all, 0.0});
  // Follow cluster c living on `pts` downward from level `w` (exclusive).
  std::function<void(std::size_t, std::set<std::size_t>, double)> descend = [&](std::size_t c, std::set<std::size_t> pts,
                                                                                 double w) {
    auto it = levels.lower_bound(w);
    while (true) {
      // The split happens at the largest level below which pts disconnects.
      if (it == levels.begin()) break;
      --it;
      const double level = *it;
      if (level > w) continue;
      auto comps = components(m, pts, level);
      if (comps.size() == 1) continue;
      std::vector<std::set<std::size_t>> large;
      for (auto& comp : comps) {
        if (comp.size() >= mcs) {
          large.push_back(comp);
        } else {
          for (auto p : comp) {
            cl[c].fallen.push_back(p);
            cl[c].stability += lam(level) - cl[c].birth;
          }
        }
      }
      if (large.empty()) return;
      if (large.size() == 1) {
        pts = large[0];
        continue;
      }
      for (auto& comp : large) {
        cl[c].stability += static_cast<double>(comp.size()) * (lam(level) - cl[c].birth);
        cl.push_back({comp, lam(level)});
        const auto child = cl.size() - 1;
        cl[c].children.push_back(child);
        descend(child, comp, level);
      }
      return;
    }
    // Never disconnects again: every point leaves at the smallest level.
    for (auto p : pts) {
      cl[c].fallen.push_back(p);
      cl[c].stability += lam(*levels.begin()) - cl[c].birth;
    }
  };
  // The components at `level` are formed by edges strictly below it, so the
  // first merge of everything is at the top level.
  descend(0, all, std::numeric_limits<double>::infinity());

  std::function<std::pair<double, std::vector<std::size_t>>(std::size_t)> select = [&](std::size_t c) {
    double sum = 0;
    std::vector<std::size_t> chosen;
    for (auto k : cl[c].children) {
      auto [s, ch] = select(k);
      sum += s;
      chosen.insert(chosen.end(), ch.begin(), ch.end());
    }
    if (c != 0 && (cl[c].children.empty() || cl[c].stability >= sum)) {
      return std::pair<double, std::vector<std::size_t>>{cl[c].stability, {c}};
    }
    return std::pair{sum, chosen};
  };
  const auto chosen = select(0).second;
  std::vector<std::pair<std::size_t, std::size_t>> by_min;  // (min member, cluster)
  for (auto c : chosen) by_min.emplace_back(*cl[c].members.begin(), c);
  std::sort(by_min.begin(), by_min.end());
  for (std::size_t k = 0; k < by_min.size(); ++k) {
    for (auto p : cl[by_min[k].second].members) labels[p] = static_cast<int>(k);
  }
  return labels;
}

PhraseNode node(const std::string& text, std::vector<double> v) {
  PhraseNode n;
  n.phrase.text = text;
  n.phrase.head_token = text.substr(text.rfind(' ') + 1);
  n.embedding = EmbeddingVector(std::move(v));
  return n;
}

Partition partition_of(std::vector<std::vector<std::size_t>> clusters, std::size_t n) {
  Partition p;
  p.assignment.resize(n);
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (auto i : clusters[c]) p.assignment[i] = c;
  }
  p.clusters = std::move(clusters);
  return p;
}

std::vector<EmbeddingVector> embeddings(const std::vector<std::vector<double>>& pts) {
  std::vector<EmbeddingVector> out;
  for (const auto& p : pts) out.emplace_back(p);
  return out;
}

void check_partition(const Partition& p, std::size_t n) {
  std::vector<int> seen(n, 0);
  std::size_t total = 0;
  for (std::size_t c = 0; c < p.clusters.size(); ++c) {
    CHECK_FALSE(p.clusters[c].empty());
    total += p.clusters[c].size();
    for (auto i : p.clusters[c]) {
      REQUIRE(i < n);
      CHECK(++seen[i] == 1);
      CHECK(p.assignment[i] == c);
    }
  }
  CHECK(total == n);
}

}  // namespace

TEST_CASE("hdbscan labels match the scikit-learn reference") {
  std::ifstream in(PRIORART_TEST_DATA_DIR "/hdbscan_golden.jsonl");
  REQUIRE(in);
  std::string line;
  int cases = 0;
  while (std::getline(in, line)) {
    const auto rec = nlohmann::json::parse(line);
    const auto pts = rec["points"].get<std::vector<std::vector<double>>>();
    const auto mcs = rec["min_cluster_size"].get<std::size_t>();
    INFO("case " << cases << " n=" << pts.size() << " mcs=" << mcs);
    CHECK(hdbscan_labels(plain_euclidean(pts), mcs) == rec["labels"].get<std::vector<int>>());
    ++cases;
  }
  CHECK(cases == 100);
}

TEST_CASE("hdbscan agrees with the threshold-sweep oracle") {
  // Continuous coordinates, so no two merges share a distance and the sweep
  // (which merges everything at one level at once) sees the same hierarchy.
  std::mt19937 rng(99);
  std::normal_distribution<double> g(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng() % 58;
    const std::size_t mcs = 2 + rng() % 5;
    std::vector<std::vector<double>> pts;
    const int blobs = 1 + static_cast<int>(rng() % 4);
    std::vector<std::vector<double>> centers;
    for (int b = 0; b < blobs; ++b) centers.push_back({8 * g(rng), 8 * g(rng), 8 * g(rng)});
    for (std::size_t i = 0; i < n; ++i) {
      const auto& c = centers[rng() % blobs];
      pts.push_back({c[0] + g(rng), c[1] + g(rng), c[2] + g(rng)});
    }
    const auto d = plain_euclidean(pts);
    INFO("trial " << trial << " n=" << n << " mcs=" << mcs);
    CHECK(hdbscan_labels(d, mcs) == sweep_oracle(d, mcs));
  }
}

TEST_CASE("hdbscan partition does not depend on input order, even with tied distances") {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng() % 28;
    const std::size_t mcs = 2 + rng() % 4;
    std::vector<std::vector<double>> pts;
    const int blobs = 1 + static_cast<int>(rng() % 3);
    for (std::size_t i = 0; i < n; ++i) {
      pts.push_back({20.0 * static_cast<double>(rng() % blobs) + static_cast<double>(rng() % 4),
                     static_cast<double>(rng() % 4)});
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<double>> shuffled;
    for (auto i : perm) shuffled.push_back(pts[i]);

    const auto a = hdbscan_labels(plain_euclidean(pts), mcs);
    const auto b = hdbscan_labels(plain_euclidean(shuffled), mcs);
    auto groups = [n](const std::vector<int>& labels, const std::vector<std::size_t>& ids) {
      std::map<int, std::set<std::size_t>> m;
      std::set<std::set<std::size_t>> out;
      for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] < 0) {
          out.insert({ids[i]});
        } else {
          m[labels[i]].insert(ids[i]);
        }
      }
      for (auto& [k, v] : m) out.insert(v);
      return out;
    };
    std::vector<std::size_t> identity(n);
    std::iota(identity.begin(), identity.end(), 0);
    INFO("trial " << trial);
    CHECK(groups(a, identity) == groups(b, perm));
    CHECK(a == sweep_oracle(plain_euclidean(pts), mcs));
  }
}

TEST_CASE("cluster_phrases examples") {
  SUBCASE("two tight groups") {
    std::mt19937 rng(5);
    std::normal_distribution<double> noise(0, 0.01);
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 5; ++i) pts.push_back({1 + noise(rng), noise(rng), noise(rng)});
    for (int i = 0; i < 5; ++i) pts.push_back({noise(rng), 1 + noise(rng), noise(rng)});
    const auto p = cluster_phrases(embeddings(pts), 3);
    CHECK(p.clusters == std::vector<std::vector<std::size_t>>{{0, 1, 2, 3, 4}, {5, 6, 7, 8, 9}});
  }
  SUBCASE("fewer points than min_cluster_size") {
    const auto p = cluster_phrases(embeddings({{1, 0}, {0, 1}}), 3);
    CHECK(p.clusters == std::vector<std::vector<std::size_t>>{{0}, {1}});
  }
  SUBCASE("identical points form one cluster") {
    const auto p = cluster_phrases(embeddings({{1, 2}, {1, 2}, {2, 4}, {1, 2}}), 3);
    CHECK(p.clusters == std::vector<std::vector<std::size_t>>{{0, 1, 2, 3}});
  }
  SUBCASE("min_cluster_size below 2 is rejected") {
    CHECK_THROWS_AS(cluster_phrases(embeddings({{1, 0}}), 1), std::invalid_argument);
  }
}

TEST_CASE("cluster_phrases always returns a partition") {
  std::mt19937 rng(17);
  std::normal_distribution<double> g(0, 1);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng() % 40;
    std::vector<std::vector<double>> pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back({g(rng), g(rng), g(rng), g(rng)});
    const auto p = cluster_phrases(embeddings(pts), 2 + rng() % 4);
    check_partition(p, n);
    for (std::size_t c = 1; c < p.clusters.size(); ++c) CHECK(p.clusters[c - 1].front() < p.clusters[c].front());
  }
}

TEST_CASE("build_graph examples") {
  const std::vector<PhraseNode> four = {node("a", {1, 0, 0}), node("b", {0, 1, 0}), node("c", {0, 0, 1}),
                                        node("d", {1, 1, 1})};
  const auto singletons = partition_of({{0}, {1}, {2}, {3}}, 4);
  CHECK(build_graph(four, singletons, 1.0).edges.empty());
  CHECK(build_graph(four, singletons, -1.0).edges.size() == 6);

  // Vectors with pairwise cosines 0.9, 0.4, 0.2 from a Cholesky factor.
  Eigen::Matrix3d gram;
  gram << 1, 0.9, 0.4, 0.9, 1, 0.2, 0.4, 0.2, 1;
  const Eigen::Matrix3d l = gram.llt().matrixL();
  std::vector<PhraseNode> three;
  for (int i = 0; i < 3; ++i) three.push_back(node(std::string(1, static_cast<char>('a' + i)), {l(i, 0), l(i, 1), l(i, 2)}));
  const auto g = build_graph(three, partition_of({{0}, {1}, {2}}, 3), 0.5);
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0].a == 0);
  CHECK(g.edges[0].b == 1);
  CHECK(g.edges[0].similarity == doctest::Approx(0.9).epsilon(1e-12));

  CHECK_THROWS_AS(build_graph({}, Partition{}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(build_graph(four, partition_of({{0, 1}, {1, 2, 3}}, 4), 0.5), std::invalid_argument);
}

TEST_CASE("graph invariants on random inputs") {
  std::mt19937 rng(3);
  std::normal_distribution<double> g(0, 1);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng() % 25;
    std::vector<PhraseNode> nodes;
    for (std::size_t i = 0; i < n; ++i) nodes.push_back(node("p" + std::to_string(i), {g(rng), g(rng), g(rng)}));
    const double tau = std::uniform_real_distribution<double>(-0.5, 0.9)(rng);
    const auto graph = build_graph(nodes, tau, 3);
    check_partition(graph.clusters, n);
    std::set<std::pair<std::size_t, std::size_t>> pairs;
    for (const auto& e : graph.edges) {
      CHECK(e.a < e.b);
      CHECK(e.similarity > tau);
      CHECK(pairs.insert({e.a, e.b}).second);
    }
    // Exactly the pairs above the threshold.
    std::size_t expected = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) expected += priorart::embedding::cosine(nodes[i].embedding, nodes[j].embedding) > tau;
    }
    CHECK(graph.edges.size() == expected);

    const auto ranked = rank_phrases(graph, GraphOptions{});
    std::vector<std::size_t> ranks;
    double pr_sum = 0;
    for (std::size_t k = 0; k < ranked.size(); ++k) {
      const auto& r = ranked[k];
      ranks.push_back(r.rank);
      pr_sum += r.pagerank;
      CHECK(r.degree >= 0);
      CHECK(r.degree <= 1);
      CHECK(r.pagerank > 0);
      CHECK(r.betweenness >= 0);
      CHECK(r.semantic == (r.connectivity + r.uniqueness) / 2);
      if (k > 0) CHECK(ranked[k - 1].composite >= r.composite);
    }
    std::sort(ranks.begin(), ranks.end());
    for (std::size_t k = 0; k < ranks.size(); ++k) CHECK(ranks[k] == k + 1);
    CHECK(pr_sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("connectivity examples") {
  // One cluster; the third node sits on both centroids.
  const auto g = build_graph({node("a", {1, 0}), node("b", {0, 1}), node("c", {0.5, 0.5})}, partition_of({{0, 1, 2}}, 3),
                             0.6);
  const auto s = connectivity_scores(g, 0.5);
  CHECK(s[2] == 1.0);
  CHECK(s[0] == 0.0);
  CHECK(s[1] == 0.0);

  const auto farthest = build_graph({node("a", {1, 0}), node("b", {1, 0.1}), node("c", {1, -0.1}), node("d", {0, 5})},
                                    partition_of({{0, 1, 2, 3}}, 4), 0.6);
  CHECK(connectivity_scores(farthest, 0.3)[3] == 0.0);

  // With alpha_c = 1 moving another cluster changes Cg but not the score.
  auto with_other = [](std::vector<double> other) {
    return build_graph({node("a", {1, 0, 0}), node("b", {1, 0.2, 0}), node("c", {1, 0, 0.3}), node("z", std::move(other))},
                       partition_of({{0, 1, 2}, {3}}, 4), 0.6);
  };
  const auto s1 = connectivity_scores(with_other({0, 0, 1}), 1.0);
  const auto s2 = connectivity_scores(with_other({-3, 4, 1}), 1.0);
  for (int i = 0; i < 3; ++i) CHECK(s1[i] == doctest::Approx(s2[i]).epsilon(1e-12));
  const auto half1 = connectivity_scores(with_other({0, 0, 1}), 0.5);
  const auto half2 = connectivity_scores(with_other({-3, 4, 1}), 0.5);
  CHECK(half1 != half2);
  CHECK_THROWS_AS(connectivity_scores(g, 1.5), std::invalid_argument);
}

TEST_CASE("uniqueness examples") {
  SUBCASE("identical peer removes the intra term") {
    const auto g = build_graph({node("a", {1, 0}), node("b", {1, 0}), node("c", {0, 1})}, partition_of({{0, 1}, {2}}, 3),
                               0.6);
    CHECK(uniqueness_scores(g, 1.0)[0] == doctest::Approx(0.0));
    CHECK(uniqueness_scores(g, 1.0)[2] == 1.0);  // singleton
  }
  SUBCASE("hand evaluation over two clusters") {
    const double r = 1 / std::sqrt(2.0);
    const auto g = build_graph({node("a", {1, 0, 0}), node("b", {r, r, 0}), node("c", {-1, 0, 0.2}), node("d", {0, 0, 1})},
                               partition_of({{0, 1, 2}, {3}}, 4), 0.6);
    const auto s = uniqueness_scores(g, 0.4);
    // Node a: peers at cos r and cos(a, c) < 0, so Uc = clamp(cos(a,c)) = 0;
    // the other centroid is e3, cos 0.
    CHECK(s[0] == doctest::Approx(0.4 * 1 + 0.6 * 1));
    // Node b: min(cos(b,a)=r, cos(b,c)<0) clamps to 0; Ug = 0.
    CHECK(s[1] == doctest::Approx(1.0));
    // Node d: singleton, Ug = cos(d, centroid of a,b,c).
    const double cx = (1 + r - 1) / 3, cy = r / 3, cz = 0.2 / 3;
    const double ug = cz / std::sqrt(cx * cx + cy * cy + cz * cz);
    CHECK(s[3] == doctest::Approx(0.4 * 1 + 0.6 * (1 - ug)).epsilon(1e-12));
    // Node c: Uc = min(cos(c,a), cos(c,b)) < 0 clamps to 0; Ug = cos(c, e3).
    const double ugc = 0.2 / std::sqrt(1.04);
    CHECK(s[2] == doctest::Approx(0.4 + 0.6 * (1 - ugc)).epsilon(1e-12));
  }
  SUBCASE("a single cluster has no inter-cluster similarity") {
    const auto g = build_graph({node("a", {1, 0}), node("b", {0.8, 0.6})}, partition_of({{0, 1}}, 2), 0.6);
    CHECK(uniqueness_scores(g, 0.0)[0] == 1.0);
    CHECK(uniqueness_scores(g, 1.0)[0] == doctest::Approx(0.2));
  }
}

TEST_CASE("pagerank examples") {
  const auto pair = adjacency_from_edges(2, {{0, 1}});
  for (double d : {0.3, 0.85, 1.0}) {
    const auto p = pagerank(pair, {d, 1e-12, 200});
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.5));
  }
  const auto star = adjacency_from_edges(4, {{0, 1}, {0, 2}, {0, 3}});
  const auto p = pagerank(star, {1.0, 1e-12, 500});
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-9));
  for (int i = 1; i < 4; ++i) CHECK(p[i] == doctest::Approx(1.0 / 6).epsilon(1e-9));

  const auto tri_iso = adjacency_from_edges(4, {{0, 1}, {1, 2}, {0, 2}});
  const auto q = pagerank(tri_iso);
  CHECK(std::accumulate(q.begin(), q.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));

  try {
    pagerank(adjacency_from_edges(5, {{0, 1}, {1, 2}, {2, 3}}), {0.85, 1e-15, 2});
    FAIL("expected non-convergence");
  } catch (const ConvergenceError& e) {
    CHECK(e.last_iterate().size() == 5);
  }
  CHECK_THROWS_AS(pagerank(Adjacency{}), std::invalid_argument);
  CHECK_THROWS_AS(pagerank(pair, {0.0, 1e-9, 10}), std::invalid_argument);
}

TEST_CASE("pagerank matches a dense linear solve") {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = 1 + rng() % 12;
    const auto adj = random_graph(rng, n, std::uniform_real_distribution<double>(0.05, 0.8)(rng));
    const double d = std::array<double, 3>{0.5, 0.85, 0.95}[rng() % 3];
    const auto p = pagerank(adj, {d, 1e-9, 1000});
    const auto oracle = pagerank_dense(adj, d);
    double worst = 0;
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(p[i] - oracle[i]));
    CHECK(worst < 1e-6);
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("degree centrality examples") {
  CHECK(degree_centrality(adjacency_from_edges(3, {{0, 1}, {1, 2}})) == std::vector<double>{0.5, 1.0, 0.5});
  CHECK(degree_centrality(adjacency_from_edges(3, {{0, 1}, {1, 2}, {0, 2}})) == std::vector<double>{1, 1, 1});
  CHECK(degree_centrality(adjacency_from_edges(3, {})) == std::vector<double>{0, 0, 0});
}

TEST_CASE("betweenness examples") {
  CHECK(betweenness_centrality(adjacency_from_edges(3, {{0, 1}, {1, 2}})) == std::vector<double>{0, 1, 0});
  CHECK(betweenness_centrality(adjacency_from_edges(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}})) ==
        std::vector<double>{0, 0, 0, 0});
  const auto bowtie = adjacency_from_edges(5, {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}, {2, 4}});
  const auto b = betweenness_centrality(bowtie);
  CHECK(b == betweenness_by_enumeration(bowtie));
  CHECK(b[2] == 4.0);
  CHECK(*std::max_element(b.begin(), b.end()) == b[2]);
}

TEST_CASE("betweenness matches shortest-path enumeration on small graphs") {
  std::mt19937 rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 8;
    const auto adj = random_graph(rng, n, std::uniform_real_distribution<double>(0.1, 0.9)(rng));
    const auto b = betweenness_centrality(adj);
    const auto oracle = betweenness_by_enumeration(adj);
    CHECK(b == oracle);
    CHECK(betweenness_centrality(adj, 3) == b);
  }
}

TEST_CASE("betweenness falls back to floating point when path counts overflow") {
  // 40 layers of 4 nodes, consecutive layers fully joined: 4^38 shortest
  // paths between the end layers, far beyond 64 bits.
  const std::size_t layers = 40, width = 4;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t l = 0; l + 1 < layers; ++l) {
    for (std::size_t a = 0; a < width; ++a) {
      for (std::size_t b = 0; b < width; ++b) edges.emplace_back(l * width + a, (l + 1) * width + b);
    }
  }
  const auto adj = adjacency_from_edges(layers * width, edges);
  const auto b = betweenness_centrality(adj);
  CHECK(betweenness_centrality(adj, 4) == b);
  // Node v in layer l: pairs across it with one end in each side, split
  // evenly over the layer's width, plus the pairs of its own neighbours.
  for (std::size_t l = 0; l < layers; ++l) {
    const double left = static_cast<double>(l * width), right = static_cast<double>((layers - 1 - l) * width);
    const double via_layer = left * right / width;
    // A same-layer pair in layer L has its midpoints in the layers next to
    // L; node v collects its share from each adjacent layer.
    auto adjacent = [&](std::size_t L) { return (L > 0 ? 1.0 : 0.0) + (L + 1 < layers ? 1.0 : 0.0); };
    const double pairs = width * (width - 1) / 2.0;
    double siblings = 0;
    if (l > 0) siblings += pairs / (width * adjacent(l - 1));
    if (l + 1 < layers) siblings += pairs / (width * adjacent(l + 1));
    for (std::size_t a = 0; a < width; ++a) {
      INFO("layer " << l);
      CHECK(b[l * width + a] == doctest::Approx(via_layer + siblings).epsilon(1e-9));
    }
  }
}

namespace {

RankedPhrase component_row(const std::string& text, double p, double d, double b, double s) {
  RankedPhrase r;
  r.phrase.text = text;
  r.pagerank = p;
  r.degree = d;
  r.betweenness = b;
  r.semantic = s;
  return r;
}

std::vector<std::string> order(const std::vector<RankedPhrase>& rs) {
  std::vector<std::string> out;
  for (const auto& r : rs) out.push_back(r.phrase.text);
  return out;
}

}  // namespace

TEST_CASE("composite_rank examples") {
  const std::vector<RankedPhrase> rows = {component_row("w", 0.4, 1.0, 0, 0.5), component_row("x", 0.3, 0.5, 2, 0.7),
                                          component_row("y", 0.2, 0.5, 1, 0.6), component_row("z", 0.1, 1.0, 0, 0.4)};
  const auto ranked = composite_rank(rows, {0.25, 0.25, 0.2});
  CHECK(order(ranked) == std::vector<std::string>{"x", "w", "y", "z"});
  // Normalized columns: P {1, 2/3, 1/3, 0}, D {1, 0, 0, 1}, B {0, 1, 1/2, 0}, S {1/3, 1, 2/3, 0}.
  CHECK(ranked[0].composite == doctest::Approx(0.25 * 2 / 3 + 0.2 + 0.3).epsilon(1e-12));
  CHECK(ranked[1].composite == doctest::Approx(0.25 + 0.25 + 0.3 / 3).epsilon(1e-12));
  CHECK(ranked[2].composite == doctest::Approx(0.25 / 3 + 0.1 + 0.2).epsilon(1e-12));
  CHECK(ranked[3].composite == doctest::Approx(0.25).epsilon(1e-12));
  for (std::size_t k = 0; k < 4; ++k) CHECK(ranked[k].rank == k + 1);

  CHECK(order(composite_rank(rows, {0, 0, 0})) == std::vector<std::string>{"x", "y", "w", "z"});

  const std::vector<RankedPhrase> flat = {component_row("gamma", 1, 1, 1, 1), component_row("alpha", 1, 1, 1, 1),
                                          component_row("beta", 1, 1, 1, 1)};
  const auto f = composite_rank(flat, {});
  CHECK(order(f) == std::vector<std::string>{"alpha", "beta", "gamma"});
  CHECK(f[0].composite == f[2].composite);

  CHECK_THROWS_AS(composite_rank(rows, {0.5, 0.5, 0.2}), std::invalid_argument);
  CHECK_THROWS_AS(composite_rank(rows, {-0.1, 0.5, 0.2}), std::invalid_argument);
}

TEST_CASE("composite_rank ordering ignores positive affine rescaling of a component") {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<RankedPhrase> rows;
    const std::size_t n = 2 + rng() % 10;
    for (std::size_t i = 0; i < n; ++i) {
      rows.push_back(component_row("p" + std::to_string(i), u(rng), u(rng), u(rng) * 5, u(rng)));
    }
    const RankWeights w{0.25, 0.25, 0.2};
    const auto base = composite_rank(rows, w);
    auto scaled = rows;
    const double a = 0.5 + 3 * u(rng), b = u(rng) - 0.5;
    for (auto& r : scaled) {
      switch (trial % 3) {
        case 0: r.pagerank = a * r.pagerank + b; break;
        case 1: r.degree = a * r.degree + b; break;
        default: r.betweenness = a * r.betweenness + b; break;
      }
    }
    CHECK(order(composite_rank(scaled, w)) == order(base));
    CHECK(order(composite_rank(rows, w)) == order(base));
  }
}

TEST_CASE("rank_phrases is deterministic and the dump lists nodes and edges") {
  std::mt19937 rng(12);
  std::normal_distribution<double> g(0, 1);
  std::vector<PhraseNode> nodes;
  for (int i = 0; i < 20; ++i) nodes.push_back(node("phrase " + std::to_string(i), {g(rng), g(rng), g(rng)}));
  const auto graph = build_graph(nodes, 0.3, 3);
  GraphOptions one, many;
  many.workers = 4;
  const auto a = rank_phrases(graph, one);
  const auto b = rank_phrases(graph, many);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].phrase == b[i].phrase);
    CHECK(a[i].composite == b[i].composite);
    CHECK(a[i].betweenness == b[i].betweenness);
  }
  std::ostringstream out;
  write_graph_dump(graph, out);
  const auto j = nlohmann::json::parse(out.str());
  CHECK(j["nodes"].size() == 20);
  CHECK(j["edges"].size() == graph.edges.size());
}
