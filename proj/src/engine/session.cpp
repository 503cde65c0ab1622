#include "hcn/engine/session.hpp"

#include <fmt/format.h>

#include "hcn/util/error.hpp"
#include "hcn/util/log.hpp"

namespace hcn::engine {

ActionId select_action(const neural::ActionDistribution& dist, SelectionMode mode,
                       std::mt19937_64& rng) {
  const auto n = dist.size();
  if (n == 0) throw DimensionError("empty action distribution");
  if (mode == SelectionMode::greedy) {
    ActionId best = 0;
    for (ActionId a = 1; a < n; ++a)
      if (dist[a] > dist[best]) best = a;
    return best;
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double acc = 0.0;
  ActionId last_positive = 0;
  for (ActionId a = 0; a < n; ++a) {
    if (dist[a] <= 0.0) continue;
    last_positive = a;
    acc += dist[a];
    if (u < acc) return a;
  }
  return last_positive;  // rounding left u above the cumulative sum
}

std::string format_transcript_line(const TranscriptEntry& entry) {
  switch (entry.speaker) {
    case Speaker::user:
      return "USER: " + (entry.text.empty() ? std::string("<SILENCE>") : entry.text);
    case Speaker::system:
      return "SYS: " + entry.text;
    case Speaker::api:
      return "API: " + entry.text;
  }
  return {};
}

Session::Session(const DomainPack& pack, const features::Featurizer& featurizer,
                 const neural::LstmParameters& params)
    : pack_(&pack),
      featurizer_(&featurizer),
      params_(&params),
      lstm_state_(neural::LstmState::zeros(params.shape.hidden)),
      entity_state_(pack.initial_state()) {}

Session new_session(const DomainPack& pack, const features::Featurizer& featurizer,
                    const neural::LstmParameters& params) {
  if (pack.action_count() != params.shape.action_count)
    throw DimensionError(fmt::format("domain has {} actions but the model has {}",
                                     pack.action_count(), params.shape.action_count));
  if (featurizer.obs_size() != params.shape.obs_size)
    throw DimensionError(fmt::format("featurizer produces {} features but the model expects {}",
                                     featurizer.obs_size(), params.shape.obs_size));
  if (featurizer.layout().context != pack.context_size())
    throw DimensionError("featurizer context segment does not match the domain");
  return Session(pack, featurizer, params);
}

StepRecord Session::step(std::string_view user_text, SelectionMode mode, std::mt19937_64& rng) {
  return step(user_text, [&](const neural::ActionDistribution& dist, const ActionMask&,
                             const EntityState&) { return select_action(dist, mode, rng); });
}

StepRecord Session::step(std::string_view user_text, const ActionChooser& choose) {
  const auto& pack = *pack_;
  const auto& params = *params_;

  const Mentions mentions = pack.extract_entities(user_text);
  pack.update_state(entity_state_, mentions, user_text);
  ActionMask mask = pack.action_mask(entity_state_);
  const Eigen::VectorXd context = pack.context_features(entity_state_, mentions);

  StepRecord rec;
  if (mask.none()) {
    log::logger()->warn("domain returned an all-zero action mask; using the unmasked softmax");
    mask = ActionMask::all(pack.action_count());
    rec.mask_fallback = true;
  }
  rec.observation = featurizer_->featurize(user_text, context, api_features_).values();
  api_features_.resize(0);

  const auto x = neural::build_input(params.shape, rec.observation, previous_action_, mask);
  lstm_state_ = neural::lstm_step(params, lstm_state_, x);
  rec.distribution = neural::output_distribution(params, lstm_state_.hidden, mask);
  rec.mask = mask;

  rec.state = entity_state_;
  rec.action = choose(rec.distribution, mask, entity_state_);
  if (rec.action >= pack.action_count() || !mask.test(rec.action))
    throw DataError(fmt::format("chooser returned action {} which is not permitted", rec.action));
  const auto& action = pack.action(rec.action);
  rec.kind = action.kind;

  try {
    rec.rendered = render_action(pack, action, entity_state_);
  } catch (const DataError& e) {
    if (!rec.mask_fallback && mask.count() != mask.size()) throw;
    // Only reachable without masking: keep the raw template.
    log::logger()->debug("{}", e.what());
    rec.rendered = action.surface;
  }

  transcript_.push_back({Speaker::user, std::string(user_text)});
  pack.record_action(entity_state_, action, rec.rendered);
  if (action.kind == ActionKind::api) {
    auto result = pack.dispatch_api(action, rec.rendered, entity_state_);
    rec.api_result = std::move(result.text);
    api_features_ = std::move(result.features);
    transcript_.push_back({Speaker::api, rec.rendered});
  } else {
    transcript_.push_back({Speaker::system, rec.rendered});
  }
  previous_action_ = rec.action;
  return rec;
}

std::vector<StepRecord> Session::respond(std::string_view user_text, SelectionMode mode,
                                         std::mt19937_64& rng, std::size_t max_chain) {
  std::vector<StepRecord> out;
  out.push_back(step(user_text, mode, rng));
  while (out.back().kind == ActionKind::api && out.size() < max_chain)
    out.push_back(step("", mode, rng));
  return out;
}

}  // namespace hcn::engine
