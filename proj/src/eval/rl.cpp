#include "hcn/eval/rl.hpp"

#include <memory>
#include <random>
#include <vector>

#include "hcn/engine/session.hpp"

namespace hcn::eval {

double success_rate(const engine::DomainPack& pack, const features::Featurizer& featurizer,
                    const neural::LstmParameters& params, engine::EpisodeEnvironment& environment,
                    const engine::ActionChooser& choose, std::size_t episodes,
                    std::uint64_t seed) {
  if (episodes == 0) return 0.0;
  std::mt19937_64 rng(seed);
  std::size_t wins = 0;
  for (std::size_t i = 0; i < episodes; ++i) {
    auto session = engine::new_session(pack, featurizer, params);
    wins += engine::run_episode(session, environment, choose, rng).success;
  }
  return static_cast<double>(wins) / static_cast<double>(episodes);
}

double rl_success_rate(const neural::LstmParameters& params, const engine::DomainPack& pack,
                       const features::Featurizer& featurizer,
                       engine::EpisodeEnvironment& environment, std::size_t episodes,
                       std::uint64_t seed) {
  std::mt19937_64 unused;
  const engine::ActionChooser greedy = [&unused](const neural::ActionDistribution& dist,
                                                 const ActionMask&, const engine::EntityState&) {
    return engine::select_action(dist, engine::SelectionMode::greedy, unused);
  };
  return success_rate(pack, featurizer, params, environment, greedy, episodes, seed);
}

engine::ActionChooser uniform_chooser(std::uint64_t seed) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return [rng](const neural::ActionDistribution&, const ActionMask& mask,
               const engine::EntityState&) {
    std::vector<ActionId> allowed;
    for (ActionId a = 0; a < mask.size(); ++a)
      if (mask.test(a)) allowed.push_back(a);
    std::uniform_int_distribution<std::size_t> pick(0, allowed.size() - 1);
    return allowed[pick(*rng)];
  };
}

}  // namespace hcn::eval
