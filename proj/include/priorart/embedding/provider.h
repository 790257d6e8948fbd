#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "priorart/embedding/vector.h"

namespace priorart::embedding {

// Text -> vector. Implementations are deterministic per instance and safe to
// call from several threads at once.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual const std::string& name() const noexcept = 0;
  virtual std::size_t dim() const noexcept = 0;
  virtual EmbeddingVector embed(std::string_view text) const = 0;
  // Order-preserving. The default calls embed() per text.
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const;
};

// Feature hashing of normalized, stopword-filtered unigrams and bigrams into
// `dim` signed buckets, L2-normalized. Text with no surviving tokens (or whose
// features cancel out) maps to the sentinel basis vector e0.
// Throws std::invalid_argument when dim < 8.
EmbeddingVector hash_embed(std::string_view text, std::size_t dim, std::uint64_t seed);

class HashProvider final : public EmbeddingProvider {
 public:
  HashProvider(std::size_t dim, std::uint64_t seed);

  const std::string& name() const noexcept override { return name_; }
  std::size_t dim() const noexcept override { return dim_; }
  EmbeddingVector embed(std::string_view text) const override { return hash_embed(text, dim_, seed_); }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
  std::string name_;
};

struct RemoteOptions {
  std::string url;    // base address; empty means $FULLRECALL_EMBED_URL
  std::string model;  // sent in every request body
  int timeout_ms = 10000;
  std::size_t max_batch = 64;
  int attempts = 3;
  int backoff_ms = 200;       // first retry delay, doubled per attempt
  int backoff_cap_ms = 2000;
  std::size_t parallelism = 4;  // in-flight requests
  std::filesystem::path cache;  // vector store file; empty keeps the cache in memory
};

struct ProviderConfig {
  std::string kind = "hash";  // hash | file | remote
  std::size_t dim = 384;
  std::uint64_t seed = 0;
  std::filesystem::path store;  // for kind == file
  RemoteOptions remote;         // for kind == remote
};

// Throws ConfigError for an unknown kind or missing settings.
std::unique_ptr<EmbeddingProvider> make_provider(const ProviderConfig& config);

}  // namespace priorart::embedding
