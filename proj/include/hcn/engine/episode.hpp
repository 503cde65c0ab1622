#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "hcn/engine/session.hpp"

namespace hcn::engine {

struct UserReply {
  std::string text;
  bool done = false;
  bool success = false;  // meaningful when done
};

/// A simulated user driving a session.
class EpisodeEnvironment {
 public:
  virtual ~EpisodeEnvironment() = default;
  /// Samples a new goal; returns the first user utterance.
  virtual std::string begin_episode(std::mt19937_64& rng) = 0;
  /// Reaction to one system step. API steps get an empty reply.
  virtual UserReply react(const StepRecord& step, const EntityState& state,
                          std::mt19937_64& rng) = 0;
  /// Episodes not finished after this many system actions fail.
  virtual std::size_t max_turns() const = 0;
};

struct Episode {
  std::vector<StepRecord> steps;  // one per system action
  bool success = false;
  std::size_t turns() const { return steps.size(); }
};

/// Runs one episode to completion or the turn limit. The chooser and the
/// environment share `rng`.
Episode run_episode(Session& session, EpisodeEnvironment& env, const ActionChooser& choose,
                    std::mt19937_64& rng);

}  // namespace hcn::engine
