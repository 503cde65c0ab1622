#pragma once

#include <any>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "hcn/neural/action_mask.hpp"
#include "hcn/neural/lstm.hpp"

namespace hcn::engine {

enum class ActionKind { text, api };

/// A system action: text with <slot> markers, or an API call.
struct ActionTemplate {
  ActionId id = 0;
  ActionKind kind = ActionKind::text;
  std::string surface;
  std::string api_name;  // set for kind == api
};

/// Slot names referenced by "<slot>" markers, in order of appearance.
std::vector<std::string> template_slots(std::string_view surface);

struct Mention {
  std::string type;
  std::string value;
  std::size_t token_begin = 0;
  std::size_t token_end = 0;  // one past the last token

  friend bool operator==(const Mention&, const Mention&) = default;
};
using Mentions = std::vector<Mention>;

/// Domain-owned tracking state. The engine stores and copies it but never
/// looks inside.
using EntityState = std::any;

struct ApiResult {
  std::string text;
  Eigen::VectorXd features;
};

/// Developer-supplied domain code: entity extraction and tracking, action
/// masks, context features, templates and API dispatch.
class DomainPack {
 public:
  virtual ~DomainPack() = default;

  virtual const std::vector<ActionTemplate>& templates() const = 0;
  std::size_t action_count() const { return templates().size(); }
  const ActionTemplate& action(ActionId id) const { return templates().at(id); }

  virtual std::size_t context_size() const = 0;
  virtual std::size_t api_feature_size() const { return 0; }

  virtual EntityState initial_state() const = 0;
  virtual Mentions extract_entities(std::string_view text) const = 0;
  virtual void update_state(EntityState& state, const Mentions& mentions,
                            std::string_view text) const = 0;
  /// Never all-zero for a reachable state.
  virtual ActionMask action_mask(const EntityState& state) const = 0;
  virtual Eigen::VectorXd context_features(const EntityState& state,
                                           const Mentions& mentions) const = 0;

  /// Value substituted for "<slot>" when rendering `action`, if tracked.
  virtual std::optional<std::string> slot_value(const EntityState& state,
                                                const ActionTemplate& action,
                                                std::string_view slot) const = 0;

  virtual ApiResult dispatch_api(const ActionTemplate& action, std::string_view rendered,
                                 EntityState& state) const = 0;

  /// Called once the chosen action has been rendered. API actions are
  /// dispatched afterwards.
  virtual void record_action(EntityState& /*state*/, const ActionTemplate& /*action*/,
                             std::string_view /*rendered*/) const {}
};

/// Replaces every slot marker with its tracked value. Throws DataError naming
/// the first slot without a value.
std::string render_action(const DomainPack& pack, const ActionTemplate& action,
                          const EntityState& state);

}  // namespace hcn::engine
