#pragma once

#include <map>
#include <string>
#include <vector>

#include "priorart/embedding/provider.h"

namespace priorart::testing {

// Fixed text -> vector table; unknown text throws std::out_of_range.
class TableEmbedder final : public embedding::EmbeddingProvider {
 public:
  explicit TableEmbedder(std::map<std::string, std::vector<double>> table) : table_(std::move(table)) {
    dim_ = table_.empty() ? 0 : table_.begin()->second.size();
  }
  const std::string& name() const noexcept override { return name_; }
  std::size_t dim() const noexcept override { return dim_; }
  embedding::EmbeddingVector embed(std::string_view text) const override {
    return embedding::EmbeddingVector(table_.at(std::string(text)));
  }

 private:
  std::map<std::string, std::vector<double>> table_;
  std::size_t dim_ = 0;
  std::string name_ = "table";
};

}  // namespace priorart::testing
