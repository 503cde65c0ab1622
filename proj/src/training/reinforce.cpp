#include "hcn/training/reinforce.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "hcn/engine/session.hpp"
#include "hcn/training/supervised.hpp"
#include "hcn/util/error.hpp"
#include "hcn/util/log.hpp"

namespace hcn::training {

Trajectory make_trajectory(const engine::Episode& episode, double gamma) {
  Trajectory t;
  t.observations.reserve(episode.turns());
  for (const auto& step : episode.steps) {
    t.observations.push_back(step.observation);
    t.masks.push_back(step.mask);
    t.actions.push_back(step.action);
    t.behavior_probs.push_back(step.distribution[step.action]);
  }
  t.success = episode.success;
  t.episode_return =
      episode.success ? std::pow(gamma, static_cast<double>(episode.turns() - 1)) : 0.0;
  return t;
}

double estimate_baseline(std::span<const Trajectory> window,
                         const neural::LstmParameters& params) {
  if (window.empty()) return 0.0;
  const double floor = std::log(kMinImportanceWeight);
  std::vector<double> log_w;
  log_w.reserve(window.size());
  for (const auto& t : window) {
    double behavior = 0.0;
    for (const double p : t.behavior_probs) behavior += std::log(p);
    const double current = neural::sequence_log_prob(params, t.observations, t.masks, t.actions);
    log_w.push_back(std::max(current - behavior, floor));
  }
  // Normalizing by the largest weight keeps the exponentials finite.
  const double top = *std::max_element(log_w.begin(), log_w.end());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < window.size(); ++i) {
    const double w = std::exp(log_w[i] - top);
    num += w * window[i].episode_return;
    den += w;
  }
  return num / den;
}

std::vector<std::size_t> default_eval_points(std::size_t total) {
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < total && n < 100; n += 10) out.push_back(n);
  for (std::size_t n = 100; n < total; n += 100) out.push_back(n);
  out.push_back(total);
  return out;
}

void RlConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw UsageError("gamma must be in (0, 1]");
  if (baseline_window == 0) throw UsageError("baseline window must be at least 1");
  if (restore_epoch_cap == 0) throw UsageError("restore epoch cap must be positive");
  if (!(clip_norm > 0.0)) throw UsageError("clip norm must be positive");
}

RlResult run_rl(neural::LstmParameters& params, const RlConfig& config,
                const engine::DomainPack& pack, const features::Featurizer& featurizer,
                engine::EpisodeEnvironment& environment,
                std::vector<engine::EncodedDialog> sl_set,
                std::optional<InterleaveSchedule> schedule, const RlHooks& hooks) {
  config.validate();
  if (schedule && schedule->every == 0) throw UsageError("interleave period must be positive");

  auto rl_optimizer = neural::AdaDeltaState::zeros(params.shape);
  auto sl_optimizer = neural::AdaDeltaState::zeros(params.shape);
  std::mt19937_64 rng(config.seed);
  const auto start = std::chrono::steady_clock::now();

  auto points = config.eval_points.empty() ? default_eval_points(config.dialogs)
                                           : config.eval_points;
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  std::size_t next_point = 0;

  RlResult result;
  std::vector<Trajectory> window;
  auto mean_return = [&] {
    double s = 0.0;
    for (const auto& t : window) s += t.episode_return;
    return window.empty() ? 0.0 : s / static_cast<double>(window.size());
  };
  auto maybe_evaluate = [&](std::size_t n) {
    while (next_point < points.size() && points[next_point] < n) ++next_point;
    if (next_point == points.size() || points[next_point] != n || !hooks.evaluate) return;
    const double rate = hooks.evaluate(params);
    result.curve.push_back({n, rate});
    if (hooks.metrics)
      hooks.metrics({"rl", n, mean_return(), rate,
                     std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count()});
    log::logger()->debug("rl dialogs {} success rate {:.3f}", n, rate);
  };

  const engine::ActionChooser sample = [&rng](const neural::ActionDistribution& dist,
                                              const ActionMask&, const engine::EntityState&) {
    return engine::select_action(dist, engine::SelectionMode::sample, rng);
  };

  std::size_t pool_next = 0;
  for (std::size_t i = 0; i < config.dialogs; ++i) {
    maybe_evaluate(i);
    if (schedule && i % schedule->every == 0 && pool_next < schedule->pool.size())
      sl_set.push_back(schedule->pool[pool_next++]);

    auto session = engine::new_session(pack, featurizer, params);
    const auto episode = engine::run_episode(session, environment, sample, rng);
    Trajectory traj = make_trajectory(episode, config.gamma);
    result.successes += traj.success;

    const double baseline = estimate_baseline(window, params);
    auto grads = neural::reinforce_gradients(params, traj.observations, traj.masks, traj.actions,
                                             traj.behavior_probs, traj.episode_return, baseline);
    grads *= -1.0;  // ascent on expected return
    neural::adadelta_step(params, neural::clip_global_norm(std::move(grads), config.clip_norm),
                          rl_optimizer);

    std::size_t restore_epochs = 0;
    if (config.consistency_check && !sl_set.empty()) {
      restore_epochs = sl_consistency_restore(params, sl_optimizer, sl_set,
                                              config.restore_epoch_cap, config.clip_norm);
      if (restore_epochs > 0) ++result.restorations;
    }

    window.push_back(std::move(traj));
    if (window.size() > config.baseline_window) window.erase(window.begin());

    if (hooks.on_update)
      hooks.on_update({i, &window.back(), baseline, restore_epochs, sl_set.size(), &params});
  }
  maybe_evaluate(config.dialogs);
  return result;
}

}  // namespace hcn::training
