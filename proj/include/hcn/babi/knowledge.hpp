#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hcn/babi/dialog_io.hpp"
#include "hcn/engine/domain_pack.hpp"

namespace hcn::babi {

enum class Task { task5, task6 };

/// User-specified search constraints, in canonical order.
enum class Slot { cuisine, location, party_size, price };
inline constexpr std::array<Slot, 4> kAllSlots{Slot::cuisine, Slot::location, Slot::party_size,
                                               Slot::price};
using SlotValues = std::array<std::optional<std::string>, 4>;

std::string_view slot_name(Slot slot);
std::optional<Slot> slot_from_name(std::string_view name);
/// Slots tracked for a task: all four for Task5, party_size excluded for Task6.
std::span<const Slot> task_slots(Task task);

/// "R_cuisine" -> "cuisine", "R_post_code" -> "postcode", ...; nullopt for
/// attributes that are not entity types (R_rating).
std::optional<std::string> attribute_type(std::string_view attribute);
/// Inverse of attribute_type.
std::optional<std::string> type_attribute(std::string_view type);

/// Entity types identifying one restaurant.
bool is_identity_type(std::string_view type);

struct Restaurant {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;  // (R_attr, value)
  int rating = 0;

  const std::string* attribute(std::string_view attr) const;
  /// Value for an entity type ("name", "phone", "cuisine", ...).
  std::optional<std::string> value_of(std::string_view type) const;
};

/// Groups rows by restaurant in order of first appearance; R_rating sets the
/// rating (0 when absent or not an integer).
std::vector<Restaurant> group_rows(std::span<const DbRow> rows);
/// Stable sort, highest rating first.
void sort_by_rating(std::vector<Restaurant>& restaurants);

class KnowledgeBase {
 public:
  void add_rows(std::span<const DbRow> rows);
  void add_dialogs(std::span<const BabiDialog> dialogs);

  const std::vector<Restaurant>& restaurants() const { return restaurants_; }
  const Restaurant* find(std::string_view name) const;
  /// Restaurant whose name, phone, address or postcode equals `value`.
  const Restaurant* owner(std::string_view value) const;
  /// Restaurants matching the set cuisine, location and price, sorted by
  /// rating. Party size is not a search constraint.
  std::vector<Restaurant> query(const SlotValues& slots) const;

 private:
  std::vector<Restaurant> restaurants_;
  std::unordered_map<std::string, std::size_t> by_name_;
  std::unordered_map<std::string, std::size_t> by_identity_;
};

/// Lines "[N] restaurant R_attribute value", space or tab separated.
KnowledgeBase load_knowledge_base(const std::filesystem::path& path);

/// Slot values of an "api_call ..." utterance. Task5 reads four positional
/// arguments; Task6 reads price and location from the right and treats the
/// rest as the cuisine. "R_*" placeholders count as unset. nullopt when the
/// text is not a well-formed api_call.
std::optional<SlotValues> parse_api_call(std::string_view text, Task task);

/// Entity values by type, matched over token sequences.
class Lexicon {
 public:
  void add(std::string_view type, std::string_view value);
  void merge(const Lexicon& other);
  bool contains(std::string_view value) const;
  const std::set<std::string>& values(std::string_view type) const;

  /// Longest match first, left to right. A span matching several types
  /// yields one mention per type. `types` restricts the result when given.
  engine::Mentions match(std::span<const std::string> tokens,
                         const std::set<std::string>* types = nullptr) const;

 private:
  std::map<std::vector<std::string>, std::set<std::string>> entries_;
  std::map<std::string, std::set<std::string>, std::less<>> by_type_;
  std::size_t max_len_ = 0;
};

/// Restaurant attributes from the knowledge base, api_call arguments, and
/// (Task6, when `mine_refusals`) cuisines named in "there is no X
/// restaurant" refusals.
Lexicon build_lexicon(const KnowledgeBase& kb, std::span<const BabiDialog> dialogs, Task task,
                      bool mine_refusals = true);

std::vector<std::string> split_spaces(std::string_view text);

}  // namespace hcn::babi
