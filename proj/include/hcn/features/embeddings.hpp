#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>

#include <Eigen/Core>

namespace hcn::features {

/// Read-only word vectors of one shared dimension.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dimension) : dimension_(dimension) {}

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return vectors_.size(); }
  const Eigen::VectorXd* find(std::string_view word) const;

  /// Inserts or replaces; returns false when `word` was already present.
  bool insert(std::string word, Eigen::VectorXd vec);

 private:
  std::size_t dimension_ = 0;
  std::unordered_map<std::string, Eigen::VectorXd> vectors_;
};

/// Text format: one word per line followed by D space-separated numbers. An
/// optional word2vec "count dim" header line is skipped. Duplicate words keep
/// the last entry and log a warning; ragged lines raise DataError naming the
/// line number.
EmbeddingTable load_embeddings(const std::filesystem::path& path);
EmbeddingTable read_embeddings(std::istream& in, std::string_view source = "<stream>");

/// Mean vector of the in-table tokens, or zeros when none are known.
Eigen::VectorXd utterance_embedding(std::string_view utterance, const EmbeddingTable& table);

}  // namespace hcn::features
