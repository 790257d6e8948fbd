#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace priorart::embedding {

class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t dim() const noexcept { return values_.size(); }
  const std::vector<double>& values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  bool is_zero() const noexcept;
  double norm() const noexcept;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  std::vector<double> values_;
};

// dot(a, b) / (|a| |b|), clamped to [-1, 1]. Throws std::invalid_argument on
// a dimension mismatch or a zero vector.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// Component-wise mean. Throws std::invalid_argument on an empty list or mixed
// dimensions.
EmbeddingVector centroid(std::span<const EmbeddingVector> vectors);

EmbeddingVector scaled(const EmbeddingVector& v, double k);

}  // namespace priorart::embedding
