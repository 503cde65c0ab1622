#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hcn/babi/dialog_io.hpp"
#include "hcn/babi/knowledge.hpp"
#include "hcn/engine/domain_pack.hpp"
#include "hcn/engine/encoded_dialog.hpp"
#include "hcn/features/observation.hpp"

namespace hcn::babi {

struct BabiState {
  SlotValues slots;
  std::shared_ptr<const std::vector<Restaurant>> db;  // latest results, best rated first
  bool db_queried = false;   // an api_call has been issued
  bool db_returned = false;  // results (possibly none) arrived after the latest api_call
  std::vector<std::string> offered;  // restaurants already presented, in order
  std::optional<std::string> current;  // restaurant the system last talked about

  const std::optional<std::string>& slot(Slot s) const {
    return slots[static_cast<std::size_t>(s)];
  }
  bool results_empty() const { return db_returned && (!db || db->empty()); }
  bool results_nonempty() const { return db_returned && db && !db->empty(); }
  bool was_offered(std::string_view name) const;
  /// Best-rated result not yet presented.
  const Restaurant* next_unoffered() const;
  bool all_offered() const;
};

/// Slot mentions overwrite the stored value; other types are ignored.
void apply_mentions(BabiState& state, const engine::Mentions& mentions);
/// Result rows replace the db list (sorted by rating); "no result" empties it.
/// An empty block leaves the state alone.
void apply_db_block(BabiState& state, const DbBlock& block);
BabiState update_entity_state(BabiState state, const engine::Mentions& mentions,
                              const DbBlock& block);

/// Queries that produced a refusal in training without any results shown.
struct EmptyQueryTable {
  std::set<std::string> queries;   // "cuisine|location|price", '*' when unset
  std::set<std::string> cuisines;  // cuisine-only projection

  static std::string key(const SlotValues& slots);
  bool empty() const { return queries.empty() && cuisines.empty(); }
  bool query_known_empty(const SlotValues& slots) const;
  bool cuisine_known_empty(const SlotValues& slots) const;
};

enum class TemplateRole { plain, api_call, offer, inform, ask_slot, unk };

/// Preconditions enforced by the action mask. Each starts from the template's
/// role and is kept only if it held at every training occurrence.
struct TemplateRules {
  bool needs_required_slots = false;
  bool needs_available = false;
  bool needs_current = false;
  std::optional<Slot> blocked_when_filled;
};

struct TemplateInfo {
  TemplateRole role = TemplateRole::plain;
  std::optional<Slot> asks;
  TemplateRules rules;
  std::size_t count = 0;  // training occurrences
};

struct BabiOptions {
  Task task = Task::task5;
  bool use_mask = true;
  bool test_mode = false;  // masks the UNK action
  /// Templates seen fewer times than this fold into UNK; 0 disables folding.
  std::size_t unk_min_count = 0;
};

/// Result of replacing entity values in a system utterance with markers.
struct Templatized {
  std::string surface;
  const Restaurant* restaurant = nullptr;  // restaurant the utterance refers to
};

class BabiPack final : public engine::DomainPack {
 public:
  /// Builds lexicon, template inventory, masks and the empty-query table from
  /// training dialogs. `kb` may be empty; rows in the dialogs are added.
  static BabiPack build(std::span<const BabiDialog> training, KnowledgeBase kb,
                        const BabiOptions& options);

  /// Same pack with different mask switches; shares all built data.
  BabiPack with_options(bool use_mask, bool test_mode) const;
  /// Adds database rows and api_call arguments from `dialogs` to the
  /// knowledge base and lexicon. Templates and mask rules are unchanged.
  BabiPack with_knowledge(std::span<const BabiDialog> dialogs) const;

  const std::vector<engine::ActionTemplate>& templates() const override;
  std::size_t context_size() const override;

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

  ActionMask mask_for(const BabiState& state) const;
  Eigen::VectorXd features_for(const BabiState& state, const engine::Mentions& mentions) const;
  Templatized templatize(std::string_view system_text, const BabiState& state) const;
  /// Template id of a reference utterance; UNK when unseen and UNK exists.
  std::optional<ActionId> label_of(std::string_view system_text, const BabiState& state) const;

  /// Replays a dialog with teacher forcing. Throws DataError when a system
  /// utterance maps to no template and there is no UNK action.
  engine::EncodedDialog encode(const BabiDialog& dialog,
                               const features::Featurizer& featurizer) const;

  const BabiOptions& options() const { return options_; }
  Task task() const;
  const std::vector<TemplateInfo>& template_info() const;
  std::optional<ActionId> unk_action() const;
  const EmptyQueryTable& empty_query_table() const;
  const Lexicon& lexicon() const;
  const KnowledgeBase& knowledge_base() const;

  struct Model;

 private:
  BabiPack(std::shared_ptr<const Model> model, BabiOptions options)
      : model_(std::move(model)), options_(options) {}
  std::shared_ptr<const Model> model_;
  BabiOptions options_;
};

/// Mines the empty-query table alone (build() does this as well).
EmptyQueryTable mine_empty_query_table(std::span<const BabiDialog> training,
                                       const KnowledgeBase& kb, Task task);

/// "id<TAB>kind<TAB>surface" lines.
std::string format_template_inventory(const std::vector<engine::ActionTemplate>& templates);
void save_template_inventory(const std::filesystem::path& path,
                             const std::vector<engine::ActionTemplate>& templates);
std::vector<engine::ActionTemplate> parse_template_inventory(std::string_view text);

inline constexpr std::string_view kUnkSurface = "UNK";

}  // namespace hcn::babi
