#include "hcn/features/vocabulary.hpp"

#include <fmt/format.h>

#include "hcn/features/tokenizer.hpp"
#include "hcn/util/error.hpp"
#include "hcn/util/io.hpp"

namespace hcn::features {

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second)
      throw DataError(fmt::format("duplicate vocabulary token '{}'", tokens_[i]));
  }
}

std::optional<std::size_t> Vocabulary::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary build_vocab(std::span<const std::string> utterances) {
  std::vector<std::string> tokens;
  std::unordered_map<std::string, std::size_t> seen;
  for (const auto& u : utterances)
    for (auto& tok : tokenize(u))
      if (seen.emplace(tok, tokens.size()).second) tokens.push_back(std::move(tok));
  return Vocabulary(std::move(tokens));
}

Eigen::VectorXd bow_vector(std::string_view utterance, const Vocabulary& vocab) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vocab.size()));
  for (const auto& tok : tokenize(utterance))
    if (auto i = vocab.index_of(tok)) out(static_cast<Eigen::Index>(*i)) = 1.0;
  return out;
}

void save_vocab(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::string text;
  for (const auto& t : vocab.tokens()) {
    text += t;
    text += '\n';
  }
  io::write_file_atomic(path, text);
}

Vocabulary load_vocab(const std::filesystem::path& path) {
  auto lines = io::read_lines(path);
  std::erase_if(lines, [](const std::string& l) { return l.empty(); });
  return Vocabulary(std::move(lines));
}

}  // namespace hcn::features
