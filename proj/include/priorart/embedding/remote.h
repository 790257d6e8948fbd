#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>

#include "priorart/embedding/provider.h"
#include "priorart/embedding/vector_store.h"
#include "priorart/error.h"

namespace priorart::embedding {

// Non-transient failure from the embedding service, or a protocol violation
// (status 0).
class ServiceError : public Error {
 public:
  ServiceError(int status, const std::string& what) : Error(what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

// Client for an HTTP embedding service:
//   POST <url>/embed  {"model": "...", "texts": [...]}
//   200               {"dim": n, "vectors": [[...], ...]}
// Connection failures, 429 and 5xx are retried with capped exponential
// backoff. Every returned vector is cached by text; cached texts never hit
// the network again.
class RemoteProvider final : public EmbeddingProvider {
 public:
  // `dim` is the declared dimension; responses of any other size are
  // rejected. Loads options.cache when it exists.
  RemoteProvider(RemoteOptions options, std::size_t dim);
  ~RemoteProvider() override;

  const std::string& name() const noexcept override { return name_; }
  std::size_t dim() const noexcept override { return dim_; }
  EmbeddingVector embed(std::string_view text) const override;
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;

  // HTTP requests issued, including retries.
  std::size_t network_calls() const noexcept { return network_calls_.load(); }
  std::size_t cache_hits() const noexcept { return cache_hits_.load(); }

 private:
  std::vector<std::vector<float>> request(const std::vector<std::string>& batch) const;

  RemoteOptions options_;
  std::size_t dim_;
  std::string name_;
  std::string host_;  // scheme://host:port
  std::string path_;  // request path, ends in /embed
  mutable std::mutex cache_mutex_;
  mutable VectorStore cache_;
  mutable std::atomic<std::size_t> network_calls_{0};
  mutable std::atomic<std::size_t> cache_hits_{0};
};

}  // namespace priorart::embedding
