#include "hcn/engine/episode.hpp"

namespace hcn::engine {

Episode run_episode(Session& session, EpisodeEnvironment& env, const ActionChooser& choose,
                    std::mt19937_64& rng) {
  Episode ep;
  std::string text = env.begin_episode(rng);
  while (ep.steps.size() < env.max_turns()) {
    ep.steps.push_back(session.step(text, choose));
    const auto reply = env.react(ep.steps.back(), session.entity_state(), rng);
    if (reply.done) {
      ep.success = reply.success;
      return ep;
    }
    text = reply.text;
  }
  return ep;
}

}  // namespace hcn::engine
