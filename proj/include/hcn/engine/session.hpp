#pragma once

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "hcn/engine/domain_pack.hpp"
#include "hcn/features/observation.hpp"
#include "hcn/neural/lstm.hpp"

namespace hcn::engine {

enum class SelectionMode { greedy, sample };

/// Greedy: argmax, lowest id on ties. Sample: draw proportional to probs.
ActionId select_action(const neural::ActionDistribution& dist, SelectionMode mode,
                       std::mt19937_64& rng);

enum class Speaker { user, system, api };

struct TranscriptEntry {
  Speaker speaker;
  std::string text;
};

/// "USER: …", "SYS: …" or "API: …"; an empty user turn prints as <SILENCE>.
std::string format_transcript_line(const TranscriptEntry& entry);

struct StepRecord {
  ActionId action = 0;
  ActionKind kind = ActionKind::text;
  std::string rendered;
  std::string api_result;  // kind == api only
  neural::ActionDistribution distribution;
  Eigen::VectorXd observation;
  ActionMask mask;
  EntityState state;  // entity state the action was chosen in
  bool mask_fallback = false;  // domain returned an empty mask; softmax left unmasked
};

/// Picks an action given the masked distribution, the mask and entity state.
using ActionChooser = std::function<ActionId(
    const neural::ActionDistribution&, const ActionMask&, const EntityState&)>;

/// One conversation. Holds references to the pack, featurizer and
/// parameters, which must outlive it; all mutable state is owned here.
class Session {
 public:
  Session(const DomainPack& pack, const features::Featurizer& featurizer,
          const neural::LstmParameters& params);

  StepRecord step(std::string_view user_text, SelectionMode mode, std::mt19937_64& rng);
  StepRecord step(std::string_view user_text, const ActionChooser& choose);

  /// Steps once, then keeps stepping with an empty utterance while API
  /// actions are chosen (at most `max_chain` steps in total).
  std::vector<StepRecord> respond(std::string_view user_text, SelectionMode mode,
                                  std::mt19937_64& rng, std::size_t max_chain = 8);

  const EntityState& entity_state() const { return entity_state_; }
  const neural::LstmState& lstm_state() const { return lstm_state_; }
  std::optional<ActionId> previous_action() const { return previous_action_; }
  const std::vector<TranscriptEntry>& transcript() const { return transcript_; }

 private:
  const DomainPack* pack_;
  const features::Featurizer* featurizer_;
  const neural::LstmParameters* params_;
  neural::LstmState lstm_state_;
  EntityState entity_state_;
  std::optional<ActionId> previous_action_;
  Eigen::VectorXd api_features_;
  std::vector<TranscriptEntry> transcript_;
};

/// Throws DimensionError when the pack, featurizer and parameters disagree
/// on action count or observation size.
Session new_session(const DomainPack& pack, const features::Featurizer& featurizer,
                    const neural::LstmParameters& params);

}  // namespace hcn::engine
