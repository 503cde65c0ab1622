#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace hcn::features {

/// Token → dense index, in first-seen order. Frozen once built.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  std::optional<std::size_t> index_of(std::string_view token) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// One index per distinct token of the tokenized utterances.
Vocabulary build_vocab(std::span<const std::string> utterances);

/// Binary presence vector; out-of-vocabulary tokens are ignored.
Eigen::VectorXd bow_vector(std::string_view utterance, const Vocabulary& vocab);

void save_vocab(const std::filesystem::path& path, const Vocabulary& vocab);
Vocabulary load_vocab(const std::filesystem::path& path);

}  // namespace hcn::features
