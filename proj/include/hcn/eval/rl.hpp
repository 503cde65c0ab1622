#pragma once

#include <cstddef>
#include <cstdint>

#include "hcn/engine/episode.hpp"
#include "hcn/features/observation.hpp"
#include "hcn/neural/lstm.hpp"

namespace hcn::eval {

/// Fraction of `episodes` simulated dialogs that succeed when `choose`
/// picks every action. The environment is reseeded with `seed`, so the same
/// users are met on every call.
double success_rate(const engine::DomainPack& pack, const features::Featurizer& featurizer,
                    const neural::LstmParameters& params, engine::EpisodeEnvironment& environment,
                    const engine::ActionChooser& choose, std::size_t episodes,
                    std::uint64_t seed);

/// Frozen policy, greedy selection.
double rl_success_rate(const neural::LstmParameters& params, const engine::DomainPack& pack,
                       const features::Featurizer& featurizer,
                       engine::EpisodeEnvironment& environment, std::size_t episodes = 500,
                       std::uint64_t seed = 1);

/// Uniform over permitted actions, with its own generator.
engine::ActionChooser uniform_chooser(std::uint64_t seed);

}  // namespace hcn::eval
