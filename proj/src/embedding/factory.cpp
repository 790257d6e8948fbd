#include "priorart/embedding/provider.h"
#include "priorart/embedding/remote.h"
#include "priorart/embedding/vector_store.h"
#include "priorart/error.h"

namespace priorart::embedding {

std::unique_ptr<EmbeddingProvider> make_provider(const ProviderConfig& config) {
  if (config.kind == "hash") {
    if (config.dim < 8) throw ConfigError("hash provider needs dim >= 8");
    return std::make_unique<HashProvider>(config.dim, config.seed);
  }
  if (config.kind == "file") {
    if (config.store.empty()) throw ConfigError("file provider needs a vector store path");
    auto provider = load_vectors(config.store);
    if (provider->dim() != config.dim) {
      throw ConfigError("vector store " + config.store.string() + " has dim " + std::to_string(provider->dim()) +
                        ", configuration expects " + std::to_string(config.dim));
    }
    return provider;
  }
  if (config.kind == "remote") return std::make_unique<RemoteProvider>(config.remote, config.dim);
  throw ConfigError("unknown embedding provider '" + config.kind + "' (expected hash|file|remote)");
}

}  // namespace priorart::embedding
