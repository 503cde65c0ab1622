#include "hcn/dialer/pack.hpp"

#include <algorithm>
#include <array>
#include <set>

#include <fmt/format.h>

#include "hcn/util/error.hpp"

namespace hcn::dialer {
namespace {

std::set<std::string> expected_types(std::optional<ActionId> last) {
  if (!last) return {};
  switch (*last) {
    case kAskFullname:
    case kDisambiguate:
      return {"firstname", "nickname", "lastname"};
    case kAskFirstname:
      return {"firstname", "nickname"};
    case kAskLastname:
      return {"lastname"};
    case kAskPhonetype:
      return {"phonetype"};
    case kConfirmFallback:
      return {"intent"};
    default:
      return {};
  }
}

bool is_question(std::optional<ActionId> last) { return !expected_types(last).empty(); }

void refresh(DialerState& s) {
  s.candidates = s.has_name() ? s.directory->candidates(s.said_first, s.lastname)
                              : std::vector<std::size_t>{};
  s.phonenumber.reset();
  if (const auto type = s.resolved_type()) s.phonenumber = s.person()->phone(*type)->number;
}

const DialerState& as_state(const engine::EntityState& s) { return std::any_cast<const DialerState&>(s); }
DialerState& as_state(engine::EntityState& s) { return std::any_cast<DialerState&>(s); }

}  // namespace

const Person* DialerState::person() const {
  return unique() ? &directory->person(candidates.front()) : nullptr;
}

bool DialerState::queried() const { return unique() && queried_person == candidates.front(); }

bool DialerState::type_available() const {
  return queried() && phonetype && person()->phone(*phonetype) != nullptr;
}

bool DialerState::type_unavailable() const {
  return queried() && phonetype && person()->phone(*phonetype) == nullptr;
}

std::optional<std::string> DialerState::fallback_type() const {
  if (!type_unavailable()) return std::nullopt;
  return person()->phones.front().type;
}

std::optional<std::string> DialerState::resolved_type() const {
  if (!queried()) return std::nullopt;
  const auto* p = person();
  if (phonetype) {
    if (p->phone(*phonetype)) return phonetype;
    if (accepted_fallback) return fallback_type();
    return std::nullopt;
  }
  if (p->phones.size() == 1) return p->phones.front().type;
  return std::nullopt;
}

engine::Mentions parse_user_event(std::string_view text) {
  static const std::set<std::string_view> keys{"firstname", "nickname",  "lastname",
                                               "phonenumber", "phonetype", "intent"};
  engine::Mentions out;
  std::size_t token = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && text[pos] == ' ') ++pos;
    const auto end = std::min(text.find(' ', pos), text.size());
    if (end > pos) {
      const auto item = text.substr(pos, end - pos);
      const auto eq = item.find('=');
      if (eq != std::string_view::npos && eq + 1 < item.size() && keys.contains(item.substr(0, eq)))
        out.push_back({std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)), token,
                       token + 1});
      ++token;
    }
    pos = end;
  }
  return out;
}

void update_dialer_entities(DialerState& s, const engine::Mentions& mentions) {
  const auto expected = expected_types(s.last_action);
  s.ignored_question = false;
  s.extra_info = false;
  s.said_yes = false;
  s.said_no = false;
  bool answered = false;
  for (const auto& m : mentions) {
    if (expected.contains(m.type)) answered = true;
    else if (is_question(s.last_action) && m.type != "intent") s.extra_info = true;

    if (m.type == "firstname") {
      s.said_first = m.value;
      s.firstname = m.value;
      s.nickname_used = false;
    } else if (m.type == "nickname") {
      s.said_first = m.value;
      s.firstname = s.directory->canonical_firstname(m.value);
      s.nickname_used = true;
    } else if (m.type == "lastname") {
      s.lastname = m.value;
    } else if (m.type == "phonetype") {
      const auto type = canonical_phonetype(m.value);
      if (type && type != s.phonetype) {
        s.phonetype = type;
        s.accepted_fallback = false;
        s.declined = false;
        s.confirm_pending = false;
      }
    } else if (m.type == "intent") {
      s.said_yes = m.value == "yes";
      s.said_no = m.value == "no";
      if (s.confirm_pending && (s.said_yes || s.said_no)) {
        s.accepted_fallback = s.said_yes;
        s.declined = s.said_no;
        s.confirm_pending = false;
      }
    }
  }
  s.ignored_question = is_question(s.last_action) && !answered;
  refresh(s);
}

ActionMask dialer_mask(const DialerState& s) {
  // Questions, acknowledgements and goodbye are always possible; the rest
  // need their preconditions.
  ActionMask m = ActionMask::all(kActionCount);
  const auto n = s.candidates.size();
  m.set(kGreet, !s.greeted);
  m.set(kDisambiguate, s.said_first.has_value() && n > 1);
  m.set(kConfirmFallback, s.type_unavailable() && s.fallback_type().has_value());
  m.set(kAnnounceCall, s.resolved());
  m.set(kSorryNoSuchPerson, s.has_name() && n == 0);
  m.set(kSavePhonetypeavail, s.unique() && !s.queried());
  m.set(kPlaceCall, s.resolved());
  return m;
}

Eigen::VectorXd dialer_features(const DialerState& s) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(kContextSize);
  const auto n = s.candidates.size();
  const bool named = s.has_name();
  const std::array<bool, kContextSize> bits{
      s.said_first && !s.nickname_used, s.nickname_used, s.lastname.has_value(),
      s.phonenumber.has_value(), s.phonetype.has_value(),
      named && n == 0, named && n == 1, named && n > 1,
      s.type_available(), s.type_unavailable(),
      s.queried(), s.fallback_type().has_value(),
      s.ignored_question, s.extra_info, s.confirm_pending,
      s.said_yes, s.said_no};
  for (std::size_t i = 0; i < kContextSize; ++i) f[static_cast<Eigen::Index>(i)] = bits[i] ? 1.0 : 0.0;
  return f;
}

DialerPack::DialerPack(std::shared_ptr<const Directory> directory, bool use_mask)
    : directory_(std::move(directory)), use_mask_(use_mask) {
  if (!directory_) throw UsageError("dialer pack needs a directory");
  using engine::ActionKind;
  templates_ = {
      {kGreet, ActionKind::text, "How can I help you?", {}},
      {kAskFullname, ActionKind::text, "Who would you like to call? Please say their full name.", {}},
      {kDisambiguate, ActionKind::text,
       "There's more than one person named <firstname>. Can you say their full name?", {}},
      {kAskPhonetype, ActionKind::text, "Which phone, work, mobile or home?", {}},
      {kConfirmFallback, ActionKind::text,
       "Sorry, I don't have a <phonetype> number for <fullname>. I only have a <fallback> phone. "
       "Do you want to call that number?", {}},
      {kAnnounceCall, ActionKind::text, "Calling <fullname>, <phonetype>", {}},
      {kSorryNoSuchPerson, ActionKind::text, "Sorry, I can't find anyone by that name.", {}},
      {kGoodbye, ActionKind::text, "Oh, sorry about that. Goodbye.", {}},
      {kReprompt, ActionKind::text, "Sorry, could you say that again?", {}},
      {kAskFirstname, ActionKind::text, "What is their first name?", {}},
      {kAskLastname, ActionKind::text, "What is their last name?", {}},
      {kAck, ActionKind::text, "Okay.", {}},
      {kSavePhonetypeavail, ActionKind::api, "SavePhonetypeavail()", "SavePhonetypeavail"},
      {kPlaceCall, ActionKind::api, "PlaceCall()", "PlaceCall"},
  };
}

engine::EntityState DialerPack::initial_state() const {
  DialerState s;
  s.directory = directory_;
  return s;
}

engine::Mentions DialerPack::extract_entities(std::string_view text) const {
  return parse_user_event(text);
}

void DialerPack::update_state(engine::EntityState& state, const engine::Mentions& mentions,
                              std::string_view) const {
  update_dialer_entities(as_state(state), mentions);
}

ActionMask DialerPack::action_mask(const engine::EntityState& state) const {
  if (!use_mask_) return ActionMask::all(templates_.size());
  return dialer_mask(as_state(state));
}

Eigen::VectorXd DialerPack::context_features(const engine::EntityState& state,
                                             const engine::Mentions&) const {
  return dialer_features(as_state(state));
}

std::optional<std::string> DialerPack::slot_value(const engine::EntityState& state,
                                                  const engine::ActionTemplate& action,
                                                  std::string_view slot) const {
  const auto& s = as_state(state);
  if (slot == "firstname") return s.said_first;
  if (slot == "fullname") {
    if (const auto* p = s.person()) return p->fullname();
    return std::nullopt;
  }
  if (slot == "phonetype") return action.id == kAnnounceCall ? s.resolved_type() : s.phonetype;
  if (slot == "fallback") return s.fallback_type();
  return std::nullopt;
}

engine::ApiResult DialerPack::dispatch_api(const engine::ActionTemplate& action, std::string_view,
                                           engine::EntityState& state) const {
  auto& s = as_state(state);
  engine::ApiResult result;
  // Only reachable unmasked: the call fails and nothing is stored.
  if (action.id == kSavePhonetypeavail && !s.unique()) {
    result.text = "error: no unique contact";
  } else if (action.id == kPlaceCall && !s.phonenumber) {
    result.text = "error: no number to dial";
  } else if (action.id == kSavePhonetypeavail) {
    s.queried_person = s.candidates.front();
    std::vector<std::string> types;
    for (const auto& p : s.person()->phones) types.push_back(p.type);
    result.text = fmt::format("phonetypes: {}", fmt::join(types, " "));
  } else if (action.id == kPlaceCall) {
    result.text = fmt::format("dialing {}", *s.phonenumber);
  }
  refresh(s);
  return result;
}

void DialerPack::record_action(engine::EntityState& state, const engine::ActionTemplate& action,
                               std::string_view) const {
  auto& s = as_state(state);
  s.last_action = action.id;
  if (action.id == kGreet) s.greeted = true;
  if (action.id == kConfirmFallback) s.confirm_pending = true;
}

}  // namespace hcn::dialer
