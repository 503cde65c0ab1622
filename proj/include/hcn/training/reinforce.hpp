#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hcn/engine/encoded_dialog.hpp"
#include "hcn/engine/episode.hpp"
#include "hcn/features/observation.hpp"
#include "hcn/neural/optimizer.hpp"
#include "hcn/training/metrics.hpp"

namespace hcn::training {

struct Trajectory {
  std::vector<Eigen::VectorXd> observations;
  std::vector<ActionMask> masks;
  std::vector<ActionId> actions;
  std::vector<double> behavior_probs;  // probability of each action when it was sampled
  bool success = false;
  double episode_return = 0.0;

  std::size_t size() const { return actions.size(); }
};

/// Return is gamma^(T-1) on success, 0 otherwise.
Trajectory make_trajectory(const engine::Episode& episode, double gamma = 0.95);

/// Weighted importance sampling estimate of the current policy's return:
/// Σ w_i G_i / Σ w_i with w_i = Π_t π(a_t|h_t) / π_b(a_t|h_t), each w_i
/// floored at 1e-8. Zero for an empty window.
double estimate_baseline(std::span<const Trajectory> window,
                         const neural::LstmParameters& params);

inline constexpr double kMinImportanceWeight = 1e-8;

/// RL dialog counts at which the policy is evaluated: 0, every 10 up to
/// 100, then every 100, always ending at `total`.
std::vector<std::size_t> default_eval_points(std::size_t total);

struct RlConfig {
  double gamma = 0.95;
  std::size_t baseline_window = 100;
  std::size_t dialogs = 1000;
  std::vector<std::size_t> eval_points;  // empty: default_eval_points(dialogs)
  bool consistency_check = true;
  std::size_t restore_epoch_cap = 200;
  double clip_norm = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
};

/// One SL dialog is added before RL dialogs 0, every, 2·every, ... until
/// the pool is used up.
struct InterleaveSchedule {
  std::vector<engine::EncodedDialog> pool;
  std::size_t every = 100;
};

struct RlUpdate {
  std::size_t index = 0;  // RL dialog just completed, from 0
  const Trajectory* trajectory = nullptr;
  double baseline = 0.0;
  std::size_t restore_epochs = 0;
  std::size_t sl_set_size = 0;
  const neural::LstmParameters* params = nullptr;  // after the update and any restore
};

struct RlCurvePoint {
  std::size_t dialogs = 0;
  double success_rate = 0.0;
};

struct RlResult {
  std::vector<RlCurvePoint> curve;
  std::size_t restorations = 0;  // restores that had to run at least one epoch
  std::size_t successes = 0;     // among training episodes
};

/// Scores frozen parameters, e.g. with eval::rl_success_rate.
using PolicyEvaluator = std::function<double(const neural::LstmParameters&)>;

struct RlHooks {
  PolicyEvaluator evaluate;                       // curve left empty when unset
  std::function<void(const RlUpdate&)> on_update;
  MetricsSink metrics;
};

/// Policy-gradient training with per-dialog updates. Each RL dialog samples
/// an episode, computes G and the baseline, applies the REINFORCE gradient
/// (clipped, AdaDelta) and, when an SL set is present, restores SL
/// consistency. RL and SL keep separate optimizer states.
RlResult run_rl(neural::LstmParameters& params, const RlConfig& config,
                const engine::DomainPack& pack, const features::Featurizer& featurizer,
                engine::EpisodeEnvironment& environment,
                std::vector<engine::EncodedDialog> sl_set = {},
                std::optional<InterleaveSchedule> schedule = std::nullopt,
                const RlHooks& hooks = {});

}  // namespace hcn::training
