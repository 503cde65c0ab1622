#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "hcn/features/embeddings.hpp"
#include "hcn/features/vocabulary.hpp"

namespace hcn::features {

/// Segment lengths of the observation, in concatenation order. Disabled
/// segments have length 0.
struct ObservationLayout {
  std::size_t bow = 0;
  std::size_t embedding = 0;
  std::size_t context = 0;
  std::size_t api = 0;

  std::size_t total() const { return bow + embedding + context + api; }
  friend bool operator==(const ObservationLayout&, const ObservationLayout&) = default;
};

/// bow ⊕ embedding ⊕ context ⊕ api.
class Observation {
 public:
  Observation(Eigen::VectorXd values, ObservationLayout layout)
      : values_(std::move(values)), layout_(layout) {}

  const Eigen::VectorXd& values() const { return values_; }
  const ObservationLayout& layout() const { return layout_; }

  auto bow() const { return values_.segment(0, seg(layout_.bow)); }
  auto embedding() const { return values_.segment(seg(layout_.bow), seg(layout_.embedding)); }
  auto context() const {
    return values_.segment(seg(layout_.bow + layout_.embedding), seg(layout_.context));
  }
  auto api() const {
    return values_.segment(seg(layout_.bow + layout_.embedding + layout_.context),
                           seg(layout_.api));
  }

 private:
  static Eigen::Index seg(std::size_t n) { return static_cast<Eigen::Index>(n); }
  Eigen::VectorXd values_;
  ObservationLayout layout_;
};

/// Throws DimensionError when a segment length disagrees with the layout.
Observation assemble_observation(const Eigen::VectorXd& bow, const Eigen::VectorXd& embedding,
                                 const Eigen::VectorXd& context,
                                 const Eigen::VectorXd& api_features,
                                 const ObservationLayout& layout);

/// Text-side featurization (bag of words, averaged embedding) plus assembly.
/// Either text feature may be disabled by leaving it unset.
class Featurizer {
 public:
  Featurizer(std::optional<Vocabulary> vocab, std::shared_ptr<const EmbeddingTable> embeddings,
             std::size_t context_size, std::size_t api_size);

  const ObservationLayout& layout() const { return layout_; }
  std::size_t obs_size() const { return layout_.total(); }
  const std::optional<Vocabulary>& vocabulary() const { return vocab_; }

  Observation featurize(std::string_view utterance, const Eigen::VectorXd& context,
                        const Eigen::VectorXd& api_features) const;

 private:
  std::optional<Vocabulary> vocab_;
  std::shared_ptr<const EmbeddingTable> embeddings_;
  ObservationLayout layout_;
};

}  // namespace hcn::features
