#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hcn/engine/encoded_dialog.hpp"
#include "hcn/neural/optimizer.hpp"
#include "hcn/training/metrics.hpp"

namespace hcn::training {

struct SlConfig {
  std::size_t hidden = 128;
  std::size_t epochs = 12;
  std::size_t epoch_cap = 200;
  bool stop_at_train_acc = false;  // run up to epoch_cap, stopping at 100% train accuracy
  bool shuffle = false;            // reshuffle dialog order every epoch
  std::uint64_t seed = 1;          // initialization and shuffling
  double clip_norm = 1.0;

  void validate() const;
};

/// One gradient step on one dialog: full-BPTT gradient, global-norm clip,
/// AdaDelta. Returns the dialog's summed cross-entropy before the step.
double supervised_step(neural::LstmParameters& params, neural::AdaDeltaState& optimizer,
                       const engine::EncodedDialog& dialog, double clip_norm = 1.0);

/// Mean per-turn loss over one pass in the given order.
double supervised_epoch(neural::LstmParameters& params, neural::AdaDeltaState& optimizer,
                        std::span<const engine::EncodedDialog> dialogs,
                        std::span<const std::size_t> order, double clip_norm = 1.0);

/// Greedy actions for every turn, with the labels as action history.
std::vector<ActionId> greedy_actions(const neural::LstmParameters& params,
                                     const engine::EncodedDialog& dialog);

/// True when the greedy action equals the label on every turn.
bool reconstructs(const neural::LstmParameters& params, const engine::EncodedDialog& dialog);

/// Fraction of turns whose greedy action equals the label.
double label_accuracy(const neural::LstmParameters& params,
                      std::span<const engine::EncodedDialog> dialogs);

/// Trains from `params` in place. Emits one "sl" row per epoch.
void train_supervised(neural::LstmParameters& params, neural::AdaDeltaState& optimizer,
                      std::span<const engine::EncodedDialog> dialogs, const SlConfig& config,
                      const MetricsSink& sink = {});

/// Fresh initialization (seeded by config.seed) followed by training.
neural::LstmParameters train_supervised(std::span<const engine::EncodedDialog> dialogs,
                                        std::size_t obs_size, std::size_t action_count,
                                        const SlConfig& config, const MetricsSink& sink = {});

/// Leaves `params` untouched when greedy replay already reproduces every
/// labeled action of `sl_set`; otherwise runs supervised epochs until it
/// does. Returns the number of epochs run. Throws TrainingError listing the
/// failing dialogs when `epoch_cap` epochs are not enough.
std::size_t sl_consistency_restore(neural::LstmParameters& params,
                                   neural::AdaDeltaState& optimizer,
                                   std::span<const engine::EncodedDialog> sl_set,
                                   std::size_t epoch_cap, double clip_norm = 1.0);

}  // namespace hcn::training
