#include "priorart/embedding/vector_store.h"

#include <openssl/evp.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "priorart/error.h"

namespace priorart::embedding {
namespace {

std::string escape_key(std::string_view key) {
  std::string out;
  for (char c : key) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string unescape_key(std::string_view key) {
  std::string out;
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (key[i] != '\\' || i + 1 == key.size()) {
      out.push_back(key[i]);
      continue;
    }
    switch (key[++i]) {
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      default: out.push_back(key[i]);
    }
  }
  return out;
}

bool all_zero(const std::vector<float>& v) {
  return std::all_of(v.begin(), v.end(), [](float x) { return x == 0.0f; });
}

// `dim=384 count=2 provider=name`
void parse_header(const std::string& line, std::size_t& dim, std::size_t& count, std::string& provider) {
  std::istringstream in(line);
  std::string field;
  bool have_dim = false, have_count = false, have_provider = false;
  while (in >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw DataError("vector store header: bad field '" + field + "'");
    const auto key = field.substr(0, eq);
    const auto value = field.substr(eq + 1);
    try {
      if (key == "dim") {
        dim = std::stoul(value);
        have_dim = true;
      } else if (key == "count") {
        count = std::stoul(value);
        have_count = true;
      } else if (key == "provider") {
        provider = value;
        have_provider = true;
      }
    } catch (const std::logic_error&) {
      throw DataError("vector store header: bad value in '" + field + "'");
    }
  }
  if (!have_dim || !have_count || !have_provider || dim == 0) {
    throw DataError("vector store header must be 'dim=<n> count=<m> provider=<name>'");
  }
}

}  // namespace

std::string encode_floats(const std::vector<float>& values) {
  std::string bytes(values.size() * 4, '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, &values[i], 4);
    for (int b = 0; b < 4; ++b) bytes[i * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xff);
  }
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<float> decode_floats(std::string_view base64) {
  if (base64.size() % 4 != 0) throw DataError("vector store: base64 length not a multiple of 4");
  std::string bytes(base64.size() / 4 * 3, '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(bytes.data()),
                                reinterpret_cast<const unsigned char*>(base64.data()), static_cast<int>(base64.size()));
  if (n < 0) throw DataError("vector store: invalid base64");
  std::size_t len = static_cast<std::size_t>(n);
  // EVP_DecodeBlock counts padding as data.
  if (!base64.empty() && base64.back() == '=') --len;
  if (base64.size() > 1 && base64[base64.size() - 2] == '=') --len;
  if (len % 4 != 0) throw DataError("vector store: payload is not a whole number of float32 values");
  std::vector<float> out(len / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i * 4 + b])) << (8 * b);
    std::memcpy(&out[i], &bits, 4);
  }
  return out;
}

EmbeddingVector to_embedding(const std::vector<float>& values) {
  return EmbeddingVector(std::vector<double>(values.begin(), values.end()));
}

std::vector<float> to_floats(const EmbeddingVector& v) {
  std::vector<float> out;
  out.reserve(v.dim());
  for (double x : v.values()) out.push_back(static_cast<float>(x));
  return out;
}

VectorStore::VectorStore(std::size_t dim, std::string provider) : dim_(dim), provider_(std::move(provider)) {
  if (provider_.empty() || provider_.find_first_of(" \t\n") != std::string::npos) {
    throw std::invalid_argument("vector store provider name must be a non-empty word");
  }
}

const std::vector<float>* VectorStore::find(std::string_view key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

void VectorStore::put(std::string key, std::vector<float> values) {
  if (values.size() != dim_) {
    throw std::invalid_argument("vector store: expected " + std::to_string(dim_) + " values, got " +
                                std::to_string(values.size()));
  }
  if (all_zero(values)) throw std::invalid_argument("vector store: zero vector for '" + key + "'");
  entries_.insert_or_assign(std::move(key), std::move(values));
}

void VectorStore::write(std::ostream& out) const {
  out << "dim=" << dim_ << " count=" << entries_.size() << " provider=" << provider_ << '\n';
  for (const auto& [key, values] : entries_) out << escape_key(key) << '\t' << encode_floats(values) << '\n';
}

void VectorStore::save(const std::filesystem::path& path) const {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write vector store " + tmp.string());
    write(out);
    if (!out) throw DataError("failed writing vector store " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

VectorStore VectorStore::read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("vector store: missing header");
  std::size_t dim = 0, count = 0;
  std::string provider;
  parse_header(line, dim, count, provider);
  VectorStore store(dim, provider);

  std::size_t records = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++records;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) throw DataError("vector store record " + std::to_string(records) + ": missing tab");
    auto key = unescape_key(std::string_view(line).substr(0, tab));
    auto values = decode_floats(std::string_view(line).substr(tab + 1));
    if (values.size() != dim) {
      throw DataError("vector store record '" + key + "': expected " + std::to_string(dim) + " values, got " +
                      std::to_string(values.size()));
    }
    if (all_zero(values)) throw DataError("vector store record '" + key + "': zero vector");
    if (store.find(key)) throw DataError("vector store: duplicate key '" + key + "'");
    store.entries_.emplace(std::move(key), std::move(values));
  }
  if (records != count) {
    throw DataError("vector store: header declares " + std::to_string(count) + " records, found " +
                    std::to_string(records));
  }
  return store;
}

VectorStore VectorStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open vector store " + path.string());
  try {
    return read(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

EmbeddingVector FileProvider::embed(std::string_view text) const {
  const auto* v = store_.find(text);
  if (!v) throw DataError("no stored vector for text '" + std::string(text) + "'");
  return to_embedding(*v);
}

std::unique_ptr<EmbeddingProvider> load_vectors(const std::filesystem::path& path) {
  return std::make_unique<FileProvider>(VectorStore::load(path));
}

}  // namespace priorart::embedding
