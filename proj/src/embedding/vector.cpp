#include "priorart/embedding/vector.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace priorart::embedding {

bool EmbeddingVector::is_zero() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return x == 0.0; });
}

double EmbeddingVector::norm() const noexcept {
  double ss = 0;
  for (double x : values_) ss += x * x;
  return std::sqrt(ss);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("cosine: dimension mismatch " + std::to_string(a.dim()) + " vs " +
                                std::to_string(b.dim()));
  }
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("cosine: zero vector");
  // sqrt(na) * sqrt(nb) rather than sqrt(na * nb): keeps the expression
  // symmetric and avoids overflow for large components.
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

EmbeddingVector centroid(std::span<const EmbeddingVector> vectors) {
  if (vectors.empty()) throw std::invalid_argument("centroid: empty list");
  const std::size_t dim = vectors.front().dim();
  std::vector<double> sum(dim, 0.0);
  for (const auto& v : vectors) {
    if (v.dim() != dim) throw std::invalid_argument("centroid: mixed dimensions");
    for (std::size_t i = 0; i < dim; ++i) sum[i] += v[i];
  }
  for (auto& x : sum) x /= static_cast<double>(vectors.size());
  return EmbeddingVector(std::move(sum));
}

EmbeddingVector scaled(const EmbeddingVector& v, double k) {
  std::vector<double> out(v.values());
  for (auto& x : out) x *= k;
  return EmbeddingVector(std::move(out));
}

}  // namespace priorart::embedding
