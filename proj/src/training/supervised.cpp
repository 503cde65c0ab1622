#include "hcn/training/supervised.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "hcn/engine/session.hpp"
#include "hcn/util/error.hpp"
#include "hcn/util/log.hpp"

namespace hcn::training {

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

std::size_t turn_count(std::span<const engine::EncodedDialog> dialogs) {
  std::size_t n = 0;
  for (const auto& d : dialogs) n += d.size();
  return n;
}

}  // namespace

void SlConfig::validate() const {
  if (hidden == 0 || epochs == 0 || epoch_cap == 0)
    throw UsageError("hidden units, epochs and the epoch cap must be positive");
  if (!(clip_norm > 0.0)) throw UsageError("clip norm must be positive");
}

double supervised_step(neural::LstmParameters& params, neural::AdaDeltaState& optimizer,
                       const engine::EncodedDialog& dialog, double clip_norm) {
  auto result = neural::supervised_gradients(params, dialog.observations, dialog.masks,
                                             dialog.labels);
  const auto clipped = neural::clip_global_norm(std::move(result.gradients), clip_norm);
  neural::adadelta_step(params, clipped, optimizer);
  return result.loss;
}

double supervised_epoch(neural::LstmParameters& params, neural::AdaDeltaState& optimizer,
                        std::span<const engine::EncodedDialog> dialogs,
                        std::span<const std::size_t> order, double clip_norm) {
  double loss = 0.0;
  std::size_t turns = 0;
  for (const auto i : order) {
    loss += supervised_step(params, optimizer, dialogs[i], clip_norm);
    turns += dialogs[i].size();
  }
  return turns == 0 ? 0.0 : loss / static_cast<double>(turns);
}

std::vector<ActionId> greedy_actions(const neural::LstmParameters& params,
                                     const engine::EncodedDialog& dialog) {
  const auto dists =
      neural::forward_dialog(params, dialog.observations, dialog.masks, dialog.labels);
  std::mt19937_64 unused;
  std::vector<ActionId> out;
  out.reserve(dists.size());
  for (const auto& d : dists)
    out.push_back(engine::select_action(d, engine::SelectionMode::greedy, unused));
  return out;
}

bool reconstructs(const neural::LstmParameters& params, const engine::EncodedDialog& dialog) {
  return greedy_actions(params, dialog) == dialog.labels;
}

double label_accuracy(const neural::LstmParameters& params,
                      std::span<const engine::EncodedDialog> dialogs) {
  std::size_t correct = 0;
  for (const auto& d : dialogs) {
    const auto predicted = greedy_actions(params, d);
    for (std::size_t t = 0; t < d.size(); ++t) correct += predicted[t] == d.labels[t];
  }
  const auto turns = turn_count(dialogs);
  return turns == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(turns);
}

void train_supervised(neural::LstmParameters& params, neural::AdaDeltaState& optimizer,
                      std::span<const engine::EncodedDialog> dialogs, const SlConfig& config,
                      const MetricsSink& sink) {
  config.validate();
  if (dialogs.empty()) throw UsageError("no training dialogs");
  std::vector<std::size_t> order(dialogs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(config.seed ^ 0x5eed5eedULL);
  const auto start = std::chrono::steady_clock::now();
  const auto max_epochs = config.stop_at_train_acc ? config.epoch_cap : config.epochs;
  for (std::size_t epoch = 1; epoch <= max_epochs; ++epoch) {
    if (config.shuffle) std::shuffle(order.begin(), order.end(), rng);
    const double loss = supervised_epoch(params, optimizer, dialogs, order, config.clip_norm);
    const bool need_accuracy = config.stop_at_train_acc || sink;
    const double acc = need_accuracy ? label_accuracy(params, dialogs) : 0.0;
    if (sink) sink({"sl", epoch, loss, acc, elapsed_ms(start)});
    log::logger()->debug("epoch {} loss {:.4f} train accuracy {:.4f}", epoch, loss, acc);
    if (config.stop_at_train_acc && acc == 1.0) break;
  }
}

neural::LstmParameters train_supervised(std::span<const engine::EncodedDialog> dialogs,
                                        std::size_t obs_size, std::size_t action_count,
                                        const SlConfig& config, const MetricsSink& sink) {
  config.validate();
  auto params = neural::init_parameters(obs_size, action_count, config.hidden, config.seed);
  auto optimizer = neural::AdaDeltaState::zeros(params.shape);
  train_supervised(params, optimizer, dialogs, config, sink);
  return params;
}

std::size_t sl_consistency_restore(neural::LstmParameters& params,
                                   neural::AdaDeltaState& optimizer,
                                   std::span<const engine::EncodedDialog> sl_set,
                                   std::size_t epoch_cap, double clip_norm) {
  auto failing = [&] {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < sl_set.size(); ++i)
      if (!reconstructs(params, sl_set[i])) out.push_back(i);
    return out;
  };
  auto bad = failing();
  if (bad.empty()) return 0;
  std::vector<std::size_t> order(sl_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 1; epoch <= epoch_cap; ++epoch) {
    supervised_epoch(params, optimizer, sl_set, order, clip_norm);
    bad = failing();
    if (bad.empty()) return epoch;
  }
  throw TrainingError(fmt::format(
      "SL set not reconstructed after {} epochs; failing dialogs: {}", epoch_cap,
      fmt::join(bad, ", ")));
}

}  // namespace hcn::training
