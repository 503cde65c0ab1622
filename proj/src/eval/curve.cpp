#include "hcn/eval/curve.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "hcn/eval/accuracy.hpp"
#include "hcn/util/error.hpp"
#include "hcn/util/log.hpp"

namespace hcn::eval {

std::vector<std::size_t> default_curve_sizes(std::size_t full) {
  std::vector<std::size_t> out;
  for (const std::size_t n : {1, 2, 5, 10, 20, 50, 100, 200, 500})
    if (n < full) out.push_back(n);
  out.push_back(full);
  return out;
}

std::string LearningCurve::csv() const {
  std::string out = "size,run,accuracy\n";
  for (const auto& c : cells) out += fmt::format("{},{},{:.6f}\n", c.size, c.run, c.turn_accuracy);
  return out;
}

LearningCurve learning_curve(std::span<const engine::EncodedDialog> train,
                             std::span<const engine::EncodedDialog> test,
                             const engine::DomainPack& pack, std::size_t obs_size,
                             const CurveConfig& config) {
  if (config.runs == 0) throw UsageError("learning curve needs at least one run");
  const auto sizes = config.sizes.empty() ? default_curve_sizes(train.size()) : config.sizes;
  for (const auto n : sizes)
    if (n == 0 || n > train.size())
      throw UsageError(fmt::format("curve size {} outside 1..{}", n, train.size()));

  LearningCurve curve;
  for (const auto n : sizes) curve.rows.push_back({n, 0.0, {}});
  for (std::size_t run = 0; run < config.runs; ++run) {
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(config.seed + run);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t s = 0; s < sizes.size(); ++s) {
      std::vector<engine::EncodedDialog> subset;
      subset.reserve(sizes[s]);
      for (std::size_t i = 0; i < sizes[s]; ++i) subset.push_back(train[order[i]]);
      auto sl = config.sl;
      sl.seed = config.sl.seed + run;
      const auto params = training::train_supervised(subset, obs_size, pack.action_count(), sl);
      const auto report = turn_and_dialog_accuracy(params, pack, test);
      curve.cells.push_back({sizes[s], run, report.turn_accuracy, report.dialog_accuracy});
      curve.rows[s].per_run.push_back(report.turn_accuracy);
      log::logger()->info("curve size {} run {} turn accuracy {:.4f}", sizes[s], run,
                          report.turn_accuracy);
    }
  }
  for (auto& row : curve.rows)
    row.mean_turn_accuracy = std::accumulate(row.per_run.begin(), row.per_run.end(), 0.0) /
                             static_cast<double>(row.per_run.size());
  std::sort(curve.cells.begin(), curve.cells.end(), [](const auto& a, const auto& b) {
    return a.size != b.size ? a.size < b.size : a.run < b.run;
  });
  return curve;
}

}  // namespace hcn::eval
