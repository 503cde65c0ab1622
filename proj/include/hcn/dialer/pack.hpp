#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hcn/dialer/directory.hpp"
#include "hcn/engine/domain_pack.hpp"

namespace hcn::dialer {

/// Action ids of the name-dialing inventory.
enum Action : ActionId {
  kGreet = 0,
  kAskFullname,
  kDisambiguate,
  kAskPhonetype,
  kConfirmFallback,
  kAnnounceCall,
  kSorryNoSuchPerson,
  kGoodbye,
  kReprompt,
  kAskFirstname,
  kAskLastname,
  kAck,
  kSavePhonetypeavail,
  kPlaceCall,
  kActionCount
};

inline constexpr std::size_t kContextSize = 17;

struct DialerState {
  std::shared_ptr<const Directory> directory;

  // Entities, most recent mention wins.
  std::optional<std::string> firstname;    // canonical when the nickname was unambiguous
  std::optional<std::string> said_first;   // first name or nickname as the user said it
  bool nickname_used = false;
  std::optional<std::string> lastname;
  std::optional<std::string> phonetype;    // requested, canonical
  std::optional<std::string> phonenumber;  // set once the call target is resolved

  std::vector<std::size_t> candidates;
  std::optional<std::size_t> queried_person;  // SavePhonetypeavail was run for this person
  bool greeted = false;
  bool confirm_pending = false;
  bool accepted_fallback = false;
  bool declined = false;

  // About the latest user turn.
  bool ignored_question = false;
  bool extra_info = false;
  bool said_yes = false;
  bool said_no = false;

  std::optional<ActionId> last_action;

  bool has_name() const { return said_first.has_value() || lastname.has_value(); }
  bool unique() const { return has_name() && candidates.size() == 1; }
  const Person* person() const;  // the unique candidate, if any
  bool queried() const;          // lookup ran for the current unique candidate
  bool type_available() const;   // requested type exists for the queried person
  bool type_unavailable() const;
  std::optional<std::string> fallback_type() const;
  /// Phone type the call would use, once everything needed is known.
  std::optional<std::string> resolved_type() const;
  bool resolved() const { return resolved_type().has_value(); }
};

/// Parses "key=value" tokens. Keys: firstname, nickname, lastname,
/// phonenumber, phonetype, intent. Unknown tokens are ignored.
engine::Mentions parse_user_event(std::string_view text);

/// Applies mentions (most recent wins; unambiguous nicknames normalized) and
/// refreshes the candidate list. `last_action` decides the per-turn flags.
void update_dialer_entities(DialerState& state, const engine::Mentions& mentions);

ActionMask dialer_mask(const DialerState& state);
Eigen::VectorXd dialer_features(const DialerState& state);

class DialerPack final : public engine::DomainPack {
 public:
  /// With `use_mask` false every action is permitted in every state.
  explicit DialerPack(std::shared_ptr<const Directory> directory, bool use_mask = true);

  const Directory& directory() const { return *directory_; }
  bool use_mask() const { return use_mask_; }
  const std::vector<engine::ActionTemplate>& templates() const override { return templates_; }
  std::size_t context_size() const override { return kContextSize; }

  engine::EntityState initial_state() const override;
  engine::Mentions extract_entities(std::string_view text) const override;
  void update_state(engine::EntityState& state, const engine::Mentions& mentions,
                    std::string_view text) const override;
  ActionMask action_mask(const engine::EntityState& state) const override;
  Eigen::VectorXd context_features(const engine::EntityState& state,
                                   const engine::Mentions& mentions) const override;
  std::optional<std::string> slot_value(const engine::EntityState& state,
                                        const engine::ActionTemplate& action,
                                        std::string_view slot) const override;
  engine::ApiResult dispatch_api(const engine::ActionTemplate& action, std::string_view rendered,
                                 engine::EntityState& state) const override;
  void record_action(engine::EntityState& state, const engine::ActionTemplate& action,
                     std::string_view rendered) const override;

 private:
  std::shared_ptr<const Directory> directory_;
  bool use_mask_;
  std::vector<engine::ActionTemplate> templates_;
};

}  // namespace hcn::dialer
