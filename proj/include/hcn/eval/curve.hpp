#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hcn/engine/domain_pack.hpp"
#include "hcn/engine/encoded_dialog.hpp"
#include "hcn/training/supervised.hpp"

namespace hcn::eval {

/// Curve sizes used when none are given; `full` is the training set size.
std::vector<std::size_t> default_curve_sizes(std::size_t full);

struct CurveConfig {
  std::vector<std::size_t> sizes;
  std::size_t runs = 5;
  training::SlConfig sl;
  std::uint64_t seed = 1;  // run r shuffles with seed + r and initializes with sl.seed + r
};

struct CurveCell {
  std::size_t size = 0;
  std::size_t run = 0;
  double turn_accuracy = 0.0;
  double dialog_accuracy = 0.0;
};

struct CurveRow {
  std::size_t size = 0;
  double mean_turn_accuracy = 0.0;
  std::vector<double> per_run;
};

struct LearningCurve {
  std::vector<CurveCell> cells;
  std::vector<CurveRow> rows;

  /// "size,run,accuracy" lines.
  std::string csv() const;
};

/// For every size and run: train on a prefix of a seeded permutation of
/// `train`, then measure teacher-forced turn accuracy on `test`.
LearningCurve learning_curve(std::span<const engine::EncodedDialog> train,
                             std::span<const engine::EncodedDialog> test,
                             const engine::DomainPack& pack, std::size_t obs_size,
                             const CurveConfig& config);

}  // namespace hcn::eval
