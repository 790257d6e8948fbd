#include <cmath>
#include <stdexcept>

#include "priorart/corpus/normalize.h"
#include "priorart/embedding/provider.h"

namespace priorart::embedding {
namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::vector<EmbeddingVector> EmbeddingProvider::embed_batch(std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

EmbeddingVector hash_embed(std::string_view text, std::size_t dim, std::uint64_t seed) {
  if (dim < 8) throw std::invalid_argument("hash_embed: dim must be at least 8");
  const auto tokens = corpus::normalize_tokens(text, true);
  const std::uint64_t salt = splitmix(seed);

  std::vector<double> v(dim, 0.0);
  auto add = [&](std::string_view feature) {
    const std::uint64_t h = splitmix(fnv1a(feature) ^ salt);
    const double sign = (h >> 63) ? -1.0 : 1.0;
    v[(h & 0x7fffffffffffffffULL) % dim] += sign;
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    add("u:" + tokens[i]);
    if (i + 1 < tokens.size()) add("b:" + tokens[i] + " " + tokens[i + 1]);
  }

  double ss = 0;
  for (double x : v) ss += x * x;
  if (ss == 0.0) {
    v[0] = 1.0;  // sentinel for empty text
    return EmbeddingVector(std::move(v));
  }
  const double n = std::sqrt(ss);
  for (auto& x : v) x /= n;
  return EmbeddingVector(std::move(v));
}

HashProvider::HashProvider(std::size_t dim, std::uint64_t seed)
    : dim_(dim), seed_(seed), name_("hash-" + std::to_string(dim) + "-s" + std::to_string(seed)) {
  if (dim < 8) throw std::invalid_argument("HashProvider: dim must be at least 8");
}

}  // namespace priorart::embedding
