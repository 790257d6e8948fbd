#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "priorart/embedding/provider.h"

namespace priorart::embedding {

// Precomputed vectors keyed by exact text.
//
// File layout: a header line `dim=<n> count=<m> provider=<name>` followed by
// one `key<TAB>base64(little-endian float32 x dim)` record per line. Keys
// escape backslash, tab, CR and LF as \\, \t, \r, \n.
class VectorStore {
 public:
  VectorStore(std::size_t dim, std::string provider);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::string& provider() const noexcept { return provider_; }

  const std::vector<float>* find(std::string_view key) const;
  // Replaces an existing entry. Throws std::invalid_argument on a wrong
  // length or an all-zero vector.
  void put(std::string key, std::vector<float> values);

  const std::map<std::string, std::vector<float>, std::less<>>& entries() const noexcept { return entries_; }

  void write(std::ostream& out) const;
  // Writes to a temporary sibling and renames it into place.
  void save(const std::filesystem::path& path) const;

  // Throws DataError on a malformed header, record count, record length,
  // zero vector or duplicate key.
  static VectorStore read(std::istream& in);
  static VectorStore load(const std::filesystem::path& path);

 private:
  std::size_t dim_;
  std::string provider_;
  std::map<std::string, std::vector<float>, std::less<>> entries_;
};

std::string encode_floats(const std::vector<float>& values);
std::vector<float> decode_floats(std::string_view base64);  // throws DataError

EmbeddingVector to_embedding(const std::vector<float>& values);
std::vector<float> to_floats(const EmbeddingVector& v);

// Serves vectors from a store; unknown text is an error, never a fallback.
class FileProvider final : public EmbeddingProvider {
 public:
  explicit FileProvider(VectorStore store) : store_(std::move(store)) {}

  const std::string& name() const noexcept override { return store_.provider(); }
  std::size_t dim() const noexcept override { return store_.dim(); }
  EmbeddingVector embed(std::string_view text) const override;  // DataError naming the text

 private:
  VectorStore store_;
};

std::unique_ptr<EmbeddingProvider> load_vectors(const std::filesystem::path& path);

}  // namespace priorart::embedding
