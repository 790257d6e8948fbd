#include "priorart/embedding/remote.h"

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <map>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

namespace priorart::embedding {
namespace {

bool transient(int status) { return status == 429 || status >= 500; }

std::string provider_name(const std::string& model, std::size_t dim) {
  std::string name = "remote-" + (model.empty() ? std::string("default") : model) + "-" + std::to_string(dim);
  std::replace_if(name.begin(), name.end(), [](char c) { return c == ' ' || c == '\t' || c == '\n'; }, '_');
  return name;
}

}  // namespace

RemoteProvider::RemoteProvider(RemoteOptions options, std::size_t dim)
    : options_(std::move(options)), dim_(dim), name_(provider_name(options_.model, dim)), cache_(dim, name_) {
  if (options_.url.empty()) {
    if (const char* env = std::getenv("FULLRECALL_EMBED_URL")) options_.url = env;
  }
  if (options_.url.empty()) throw ConfigError("remote embedding provider: no URL (set FULLRECALL_EMBED_URL)");
  if (options_.max_batch == 0 || options_.attempts < 1 || options_.parallelism == 0) {
    throw ConfigError("remote embedding provider: batch size, attempts and parallelism must be positive");
  }
  const auto scheme = options_.url.find("://");
  const auto slash = options_.url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  host_ = options_.url.substr(0, slash);
  path_ = slash == std::string::npos ? "" : options_.url.substr(slash);
  while (!path_.empty() && path_.back() == '/') path_.pop_back();
  path_ += "/embed";

  if (!options_.cache.empty() && std::filesystem::exists(options_.cache)) {
    auto loaded = VectorStore::load(options_.cache);
    if (loaded.dim() != dim_ || loaded.provider() != name_) {
      throw ConfigError("embedding cache " + options_.cache.string() + " belongs to provider " + loaded.provider() +
                        " (dim " + std::to_string(loaded.dim()) + "), expected " + name_);
    }
    cache_ = std::move(loaded);
  }
}

RemoteProvider::~RemoteProvider() = default;

std::vector<std::vector<float>> RemoteProvider::request(const std::vector<std::string>& batch) const {
  httplib::Client client(host_);
  const auto timeout = std::chrono::milliseconds(options_.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  const nlohmann::json body = {{"model", options_.model}, {"texts", batch}};
  const auto payload = body.dump();
  std::string last_error;
  for (int attempt = 0; attempt < options_.attempts; ++attempt) {
    if (attempt > 0) {
      const int delay = std::min(options_.backoff_cap_ms, options_.backoff_ms << (attempt - 1));
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }
    ++network_calls_;
    auto res = client.Post(path_, payload, "application/json");
    if (!res) {
      last_error = "connection failed: " + httplib::to_string(res.error());
      continue;
    }
    if (transient(res->status)) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw ServiceError(res->status, "embedding service returned HTTP " + std::to_string(res->status) + ": " +
                                          res->body.substr(0, 200));
    }

    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw ServiceError(0, std::string("embedding service sent invalid JSON: ") + e.what());
    }
    if (!reply.contains("dim") || !reply.contains("vectors") || !reply["vectors"].is_array()) {
      throw ServiceError(0, "embedding service reply lacks dim/vectors");
    }
    const auto dim = reply["dim"].get<std::size_t>();
    if (dim != dim_) {
      throw ServiceError(0, "embedding dimension drift: provider declared " + std::to_string(dim_) +
                                ", service returned " + std::to_string(dim));
    }
    const auto& vectors = reply["vectors"];
    if (vectors.size() != batch.size()) {
      throw ServiceError(0, "embedding service returned " + std::to_string(vectors.size()) + " vectors for " +
                                std::to_string(batch.size()) + " texts");
    }
    std::vector<std::vector<float>> out;
    for (const auto& v : vectors) {
      auto values = v.get<std::vector<float>>();
      if (values.size() != dim_) {
        throw ServiceError(0, "embedding dimension drift: vector of length " + std::to_string(values.size()));
      }
      if (std::all_of(values.begin(), values.end(), [](float x) { return x == 0.0f; })) {
        throw ServiceError(0, "embedding service returned a zero vector");
      }
      out.push_back(std::move(values));
    }
    return out;
  }
  throw ServiceError(0, "embedding service unavailable after " + std::to_string(options_.attempts) +
                            " attempts: " + last_error);
}

std::vector<EmbeddingVector> RemoteProvider::embed_batch(std::span<const std::string> texts) const {
  // Texts not yet cached, each once, in first-seen order.
  std::vector<std::string> missing;
  {
    std::lock_guard lock(cache_mutex_);
    std::set<std::string_view> queued;
    for (const auto& t : texts) {
      if (cache_.find(t)) {
        ++cache_hits_;
      } else if (queued.insert(t).second) {
        missing.push_back(t);
      }
    }
  }

  if (!missing.empty()) {
    std::vector<std::vector<std::string>> batches;
    for (std::size_t i = 0; i < missing.size(); i += options_.max_batch) {
      const auto end = std::min(missing.size(), i + options_.max_batch);
      batches.emplace_back(missing.begin() + static_cast<std::ptrdiff_t>(i), missing.begin() + static_cast<std::ptrdiff_t>(end));
    }
    std::vector<std::vector<std::vector<float>>> results(batches.size());
    std::vector<std::exception_ptr> errors(batches.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t b; (b = next++) < batches.size();) {
        try {
          results[b] = request(batches[b]);
        } catch (...) {
          errors[b] = std::current_exception();
        }
      }
    };
    const std::size_t threads = std::min(options_.parallelism, batches.size());
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }

    std::lock_guard lock(cache_mutex_);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      for (std::size_t i = 0; i < batches[b].size(); ++i) cache_.put(batches[b][i], std::move(results[b][i]));
    }
    if (!options_.cache.empty()) cache_.save(options_.cache);
  }

  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  std::lock_guard lock(cache_mutex_);
  for (const auto& t : texts) out.push_back(to_embedding(*cache_.find(t)));
  return out;
}

EmbeddingVector RemoteProvider::embed(std::string_view text) const {
  const std::string t(text);
  return embed_batch(std::span<const std::string>(&t, 1)).front();
}

}  // namespace priorart::embedding
