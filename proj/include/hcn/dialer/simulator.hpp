#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hcn/dialer/directory.hpp"
#include "hcn/dialer/pack.hpp"
#include "hcn/engine/encoded_dialog.hpp"
#include "hcn/engine/episode.hpp"

namespace hcn::dialer {

struct SimulatorConfig {
  double p_use_nickname = 0.3;
  double p_out_of_coverage_name = 0.02;
  double p_out_of_coverage_phonetype = 0.02;
  double p_ignore_question = 0.1;
  double p_extra_info = 0.1;
  double p_give_up = 0.05;
  double p_specify_phonetype_upfront = 0.4;
  double p_answer_fullname = 0.5;
  double p_confirm_yes = 0.8;
  double p_restate = 0.7;
  std::size_t max_turns = 20;
  std::uint64_t seed = 1;

  /// Throws UsageError for probabilities outside [0,1] or max_turns == 0.
  void validate() const;
  /// Defaults with the out-of-coverage, ignore and give-up probabilities at 0.
  static SimulatorConfig cooperative();
};

/// Flat "key = value" lines; '#' starts a comment. Unknown keys are errors.
SimulatorConfig parse_simulator_config(std::string_view text);
std::string format_simulator_config(const SimulatorConfig& config);
SimulatorConfig load_simulator_config(const std::filesystem::path& path);

struct UserGoal {
  std::optional<std::size_t> person;  // nullopt: name not in the directory
  std::string firstname;
  std::optional<std::string> nickname;
  std::string lastname;
  std::optional<std::string> phonetype;  // preferred type, once the user has one
};

/// Structured-event user simulator. Replies are "key=value" events; the
/// episode ends on PlaceCall (success when the right person and acceptable
/// phone type are dialed), Goodbye, or when the user gives up. Giving up is
/// only considered after an unhelpful system turn: a reprompt, an
/// acknowledgement, "no such person", or a repeat of the previous action.
class UserSimulator final : public engine::EpisodeEnvironment {
 public:
  UserSimulator(std::shared_ptr<const Directory> directory, SimulatorConfig config);

  std::string begin_episode(std::mt19937_64& rng) override;
  engine::UserReply react(const engine::StepRecord& step, const engine::EntityState& state,
                          std::mt19937_64& rng) override;
  std::size_t max_turns() const override { return config_.max_turns; }

  const UserGoal& goal() const { return goal_; }
  const SimulatorConfig& config() const { return config_; }

 private:
  std::string name_event(bool full, std::mt19937_64& rng) const;
  std::string phonetype_event(std::mt19937_64& rng);
  std::string answer(ActionId action, std::mt19937_64& rng);

  std::shared_ptr<const Directory> directory_;
  SimulatorConfig config_;
  UserGoal goal_;
  bool type_stated_ = false;
  bool lastname_stated_ = false;
  bool accepted_fallback_ = false;
  std::optional<ActionId> previous_action_;  // last text action
  std::string last_utterance_;
};

/// 0.95^(T-1) on success, 0 otherwise. T = 0 throws UsageError.
double compute_return(std::size_t turns, bool success, double discount = 0.95);

/// Hand-written policy following the example name-dialing flow.
ActionId oracle_action(const DialerState& state, const ActionMask& mask);
engine::ActionChooser oracle_chooser();

/// Labeled dialogs from the oracle talking to a seeded simulator.
std::vector<engine::EncodedDialog> collect_oracle_dialogs(const DialerPack& pack,
                                                          const SimulatorConfig& config,
                                                          std::size_t count, std::uint64_t seed);

}  // namespace hcn::dialer
