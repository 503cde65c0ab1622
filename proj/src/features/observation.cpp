#include "hcn/features/observation.hpp"

#include <fmt/format.h>

#include "hcn/util/error.hpp"

namespace hcn::features {
namespace {

void check_segment(const char* name, const Eigen::VectorXd& v, std::size_t expected) {
  if (static_cast<std::size_t>(v.size()) != expected)
    throw DimensionError(
        fmt::format("{} segment has length {}, layout expects {}", name, v.size(), expected));
}

}  // namespace

Observation assemble_observation(const Eigen::VectorXd& bow, const Eigen::VectorXd& embedding,
                                 const Eigen::VectorXd& context,
                                 const Eigen::VectorXd& api_features,
                                 const ObservationLayout& layout) {
  check_segment("bow", bow, layout.bow);
  check_segment("embedding", embedding, layout.embedding);
  check_segment("context", context, layout.context);
  check_segment("api", api_features, layout.api);
  Eigen::VectorXd out(static_cast<Eigen::Index>(layout.total()));
  out << bow, embedding, context, api_features;
  return Observation(std::move(out), layout);
}

Featurizer::Featurizer(std::optional<Vocabulary> vocab,
                       std::shared_ptr<const EmbeddingTable> embeddings,
                       std::size_t context_size, std::size_t api_size)
    : vocab_(std::move(vocab)), embeddings_(std::move(embeddings)) {
  layout_.bow = vocab_ ? vocab_->size() : 0;
  layout_.embedding = embeddings_ ? embeddings_->dimension() : 0;
  layout_.context = context_size;
  layout_.api = api_size;
}

Observation Featurizer::featurize(std::string_view utterance, const Eigen::VectorXd& context,
                                  const Eigen::VectorXd& api_features) const {
  const Eigen::VectorXd bow = vocab_ ? bow_vector(utterance, *vocab_) : Eigen::VectorXd();
  const Eigen::VectorXd emb =
      embeddings_ ? utterance_embedding(utterance, *embeddings_) : Eigen::VectorXd();
  // An api segment that was never filled counts as zeros.
  if (api_features.size() == 0 && layout_.api > 0)
    return assemble_observation(bow, emb, context,
                                Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout_.api)),
                                layout_);
  return assemble_observation(bow, emb, context, api_features, layout_);
}

}  // namespace hcn::features
