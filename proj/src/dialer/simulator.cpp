#include "hcn/dialer/simulator.hpp"

#include <cmath>
#include <cstdlib>
#include <map>

#include <fmt/format.h>

#include "hcn/features/observation.hpp"
#include "hcn/util/error.hpp"
#include "hcn/util/io.hpp"

namespace hcn::dialer {
namespace {

constexpr std::string_view kUnknownLastNames[] = {"Quinlan", "Okafor", "Vasquez", "Lindqvist",
                                                  "Nakamura", "Oyelaran"};

bool chance(double p, std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

std::size_t uniform(std::size_t n, std::mt19937_64& rng) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

std::map<std::string, double SimulatorConfig::*> probability_fields() {
  return {{"p_use_nickname", &SimulatorConfig::p_use_nickname},
          {"p_out_of_coverage_name", &SimulatorConfig::p_out_of_coverage_name},
          {"p_out_of_coverage_phonetype", &SimulatorConfig::p_out_of_coverage_phonetype},
          {"p_ignore_question", &SimulatorConfig::p_ignore_question},
          {"p_extra_info", &SimulatorConfig::p_extra_info},
          {"p_give_up", &SimulatorConfig::p_give_up},
          {"p_specify_phonetype_upfront", &SimulatorConfig::p_specify_phonetype_upfront},
          {"p_answer_fullname", &SimulatorConfig::p_answer_fullname},
          {"p_confirm_yes", &SimulatorConfig::p_confirm_yes},
          {"p_restate", &SimulatorConfig::p_restate}};
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool is_question(ActionId a) {
  return a == kAskFullname || a == kDisambiguate || a == kAskPhonetype || a == kConfirmFallback ||
         a == kAskFirstname || a == kAskLastname;
}

std::string join_events(const std::string& a, const std::string& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  return a + " " + b;
}

}  // namespace

void SimulatorConfig::validate() const {
  for (const auto& [name, field] : probability_fields()) {
    const double p = this->*field;
    if (!(p >= 0.0 && p <= 1.0))
      throw UsageError(fmt::format("{} = {} is not a probability", name, p));
  }
  if (max_turns == 0) throw UsageError("max_turns must be at least 1");
}

SimulatorConfig SimulatorConfig::cooperative() {
  SimulatorConfig c;
  c.p_out_of_coverage_name = 0.0;
  c.p_out_of_coverage_phonetype = 0.0;
  c.p_ignore_question = 0.0;
  c.p_give_up = 0.0;
  return c;
}

SimulatorConfig parse_simulator_config(std::string_view text) {
  SimulatorConfig c;
  const auto fields = probability_fields();
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw DataError(fmt::format("simulator config line {}: expected key = value", line_no));
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    char* stop = nullptr;
    if (key == "max_turns" || key == "seed") {
      const auto v = std::strtoull(value.c_str(), &stop, 10);
      if (value.empty() || *stop != '\0')
        throw DataError(fmt::format("simulator config line {}: bad integer '{}'", line_no, value));
      if (key == "max_turns") c.max_turns = v;
      else c.seed = v;
    } else if (const auto it = fields.find(key); it != fields.end()) {
      const double v = std::strtod(value.c_str(), &stop);
      if (value.empty() || *stop != '\0')
        throw DataError(fmt::format("simulator config line {}: bad number '{}'", line_no, value));
      c.*(it->second) = v;
    } else {
      throw DataError(fmt::format("simulator config line {}: unknown key '{}'", line_no, key));
    }
  }
  c.validate();
  return c;
}

std::string format_simulator_config(const SimulatorConfig& c) {
  std::string out;
  for (const auto& [name, field] : probability_fields()) out += fmt::format("{} = {}\n", name, c.*field);
  out += fmt::format("max_turns = {}\nseed = {}\n", c.max_turns, c.seed);
  return out;
}

SimulatorConfig load_simulator_config(const std::filesystem::path& path) {
  return parse_simulator_config(io::read_file(path));
}

UserSimulator::UserSimulator(std::shared_ptr<const Directory> directory, SimulatorConfig config)
    : directory_(std::move(directory)), config_(config) {
  if (!directory_ || directory_->size() == 0) throw UsageError("simulator needs a directory");
  config_.validate();
}

std::string UserSimulator::begin_episode(std::mt19937_64& rng) {
  goal_ = {};
  type_stated_ = false;
  lastname_stated_ = false;
  accepted_fallback_ = false;
  previous_action_.reset();
  last_utterance_.clear();

  const auto& seed_person = directory_->person(uniform(directory_->size(), rng));
  if (chance(config_.p_out_of_coverage_name, rng)) {
    goal_.firstname = seed_person.firstname;
    do {
      goal_.lastname = kUnknownLastNames[uniform(std::size(kUnknownLastNames), rng)];
    } while (!directory_->candidates(goal_.firstname, goal_.lastname).empty());
  } else {
    goal_.person = directory_->candidates(seed_person.firstname, seed_person.lastname).front();
    goal_.firstname = seed_person.firstname;
    goal_.lastname = seed_person.lastname;
    if (!seed_person.nicknames.empty() && chance(config_.p_use_nickname, rng))
      goal_.nickname = seed_person.nicknames[uniform(seed_person.nicknames.size(), rng)];
  }
  if (goal_.person && chance(config_.p_out_of_coverage_phonetype, rng)) {
    std::vector<std::string> missing;
    for (auto t : kPhoneTypes)
      if (!seed_person.phone(t)) missing.emplace_back(t);
    if (!missing.empty()) goal_.phonetype = missing[uniform(missing.size(), rng)];
  }
  if (!goal_.phonetype && chance(config_.p_specify_phonetype_upfront, rng)) {
    const auto& phones = seed_person.phones;
    goal_.phonetype = phones[uniform(phones.size(), rng)].type;
  }
  return {};
}

std::string UserSimulator::name_event(bool full, std::mt19937_64&) const {
  std::string out = goal_.nickname ? "nickname=" + *goal_.nickname : "firstname=" + goal_.firstname;
  if (full) out += " lastname=" + goal_.lastname;
  return out;
}

std::string UserSimulator::phonetype_event(std::mt19937_64& rng) {
  if (!goal_.phonetype) {
    if (goal_.person) {
      const auto& phones = directory_->person(*goal_.person).phones;
      goal_.phonetype = phones[uniform(phones.size(), rng)].type;
    } else {
      goal_.phonetype = std::string(kPhoneTypes[uniform(std::size(kPhoneTypes), rng)]);
    }
  }
  type_stated_ = true;
  std::string word = *goal_.phonetype;
  if (word == "mobile" && chance(0.5, rng)) word = "cell";
  if (word == "work" && chance(0.5, rng)) word = "office";
  return "phonetype=" + word;
}

std::string UserSimulator::answer(ActionId action, std::mt19937_64& rng) {
  switch (action) {
    case kGreet: {
      const bool full = chance(config_.p_answer_fullname, rng);
      lastname_stated_ = full;
      auto out = name_event(full, rng);
      if (goal_.phonetype) out = join_events(out, phonetype_event(rng));
      return out;
    }
    case kAskFullname: {
      const bool full = chance(config_.p_answer_fullname, rng);
      lastname_stated_ = lastname_stated_ || full;
      return name_event(full, rng);
    }
    case kDisambiguate:
      lastname_stated_ = true;
      return name_event(true, rng);
    case kAskLastname:
      lastname_stated_ = true;
      return "lastname=" + goal_.lastname;
    case kAskFirstname:
      return name_event(false, rng);
    case kAskPhonetype:
      return phonetype_event(rng);
    case kConfirmFallback:
      accepted_fallback_ = chance(config_.p_confirm_yes, rng);
      return accepted_fallback_ ? "intent=yes" : "intent=no";
    case kSorryNoSuchPerson:
    case kReprompt:
    case kAck:
      return chance(config_.p_restate, rng) ? last_utterance_ : std::string();
    default:
      return {};
  }
}

engine::UserReply UserSimulator::react(const engine::StepRecord& step,
                                       const engine::EntityState& state, std::mt19937_64& rng) {
  const auto action = step.action;
  const auto& s = std::any_cast<const DialerState&>(state);
  if (action == kPlaceCall) {
    const auto* p = s.person();
    const auto type = s.resolved_type();
    bool ok = goal_.person && p && s.candidates.front() == *goal_.person && type;
    if (ok && goal_.phonetype && type != goal_.phonetype)
      ok = accepted_fallback_ && type == s.fallback_type();
    return {{}, true, ok};
  }
  if (action == kGoodbye) return {{}, true, false};
  if (step.kind == engine::ActionKind::api) return {};

  const bool unhelpful = action == kReprompt || action == kAck || action == kSorryNoSuchPerson ||
                         previous_action_ == action;
  previous_action_ = action;
  if (unhelpful && chance(config_.p_give_up, rng)) return {{}, true, false};

  std::string reply;
  if (is_question(action) && chance(config_.p_ignore_question, rng)) {
    reply.clear();
  } else {
    reply = answer(action, rng);
    if (is_question(action) && chance(config_.p_extra_info, rng)) {
      if (action != kAskPhonetype && !type_stated_ && goal_.phonetype)
        reply = join_events(reply, phonetype_event(rng));
      else if (action == kAskPhonetype && !lastname_stated_) {
        lastname_stated_ = true;
        reply = join_events(reply, "lastname=" + goal_.lastname);
      }
    }
  }
  if (!reply.empty() && action != kReprompt && action != kAck && action != kSorryNoSuchPerson)
    last_utterance_ = reply;
  return {reply, false, false};
}

double compute_return(std::size_t turns, bool success, double discount) {
  if (turns == 0) throw UsageError("an episode has at least one system turn");
  return success ? std::pow(discount, static_cast<double>(turns - 1)) : 0.0;
}

ActionId oracle_action(const DialerState& s, const ActionMask& mask) {
  auto pick = [&]() -> ActionId {
    if (!s.greeted) return kGreet;
    if (s.resolved()) return s.last_action == kAnnounceCall ? kPlaceCall : kAnnounceCall;
    if (s.declined) return kGoodbye;
    if (!s.has_name()) return kAskFullname;
    const auto n = s.candidates.size();
    if (n == 0) return s.last_action == kSorryNoSuchPerson ? kGoodbye : kSorryNoSuchPerson;
    if (n > 1) return s.said_first ? kDisambiguate : kAskFirstname;
    if (!s.queried()) return kSavePhonetypeavail;
    if (s.type_unavailable() && !s.accepted_fallback) return kConfirmFallback;
    if (!s.phonetype) return kAskPhonetype;
    return kReprompt;
  };
  const auto a = pick();
  if (a < mask.size() && mask.test(a)) return a;
  return mask.test(kReprompt) ? kReprompt : kGreet;
}

engine::ActionChooser oracle_chooser() {
  return [](const neural::ActionDistribution&, const ActionMask& mask,
            const engine::EntityState& state) {
    return oracle_action(std::any_cast<const DialerState&>(state), mask);
  };
}

std::vector<engine::EncodedDialog> collect_oracle_dialogs(const DialerPack& pack,
                                                          const SimulatorConfig& config,
                                                          std::size_t count, std::uint64_t seed) {
  const features::Featurizer featurizer(std::nullopt, nullptr, pack.context_size(), 0);
  // The oracle ignores the network; a one-unit model satisfies the session.
  const auto params =
      neural::init_parameters(featurizer.obs_size(), pack.action_count(), 1, seed);
  UserSimulator sim(std::make_shared<const Directory>(pack.directory()), config);
  std::mt19937_64 rng(seed);
  std::vector<engine::EncodedDialog> out;
  const auto choose = oracle_chooser();
  for (std::size_t i = 0; i < count; ++i) {
    auto session = engine::new_session(pack, featurizer, params);
    const auto ep = engine::run_episode(session, sim, choose, rng);
    engine::EncodedDialog d;
    for (const auto& step : ep.steps) {
      d.observations.push_back(step.observation);
      d.masks.push_back(step.mask);
      d.labels.push_back(step.action);
      d.references.push_back(step.rendered);
      d.states.push_back(step.state);
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace hcn::dialer
