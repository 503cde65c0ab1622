#include <doctest.h>

#include <map>

#include "hcn/dialer/directory.hpp"
#include "hcn/dialer/pack.hpp"
#include "hcn/dialer/simulator.hpp"
#include "hcn/features/observation.hpp"
#include "hcn/util/error.hpp"

using namespace hcn;
using namespace hcn::dialer;

namespace {

std::shared_ptr<const Directory> example_directory() {
  return std::make_shared<const Directory>(std::vector<Person>{
      {"Joe", {}, "Adamson", {{"work", "555-0101"}}},
      {"Joe", {}, "Smith", {{"mobile", "555-0102"}, {"work", "555-0103"}}},
      {"Sally", {}, "Smith", {{"work", "555-0104"}}},
      {"Michael", {"Mike"}, "Lee", {{"mobile", "555-0105"}, {"home", "555-0106"}}},
      {"Alexander", {"Alex"}, "King", {{"home", "555-0107"}}},
      {"Alexandra", {"Alex"}, "Hall", {{"work", "555-0108"}}},
  });
}

struct Harness {
  DialerPack pack{example_directory()};
  engine::EntityState state = pack.initial_state();

  const DialerState& s() const { return std::any_cast<const DialerState&>(state); }
  void user(std::string_view text) { pack.update_state(state, pack.extract_entities(text), text); }
  std::string system(ActionId a) {
    REQUIRE(pack.action_mask(state).test(a));
    const auto rendered = engine::render_action(pack, pack.action(a), state);
    pack.record_action(state, pack.action(a), rendered);
    if (pack.action(a).kind == engine::ActionKind::api) pack.dispatch_api(pack.action(a), rendered, state);
    return rendered;
  }
};

}  // namespace

TEST_CASE("directory generation is deterministic and controlled") {
  const auto a = generate_directory(1, 50);
  CHECK(a == generate_directory(1, 50));
  CHECK_FALSE(a == generate_directory(2, 50));
  std::map<std::string, int> firsts;
  std::size_t multi = 0;
  for (const auto& p : a.people()) {
    ++firsts[p.firstname];
    CHECK_FALSE(p.phones.empty());
    multi += p.phones.size() >= 2;
  }
  std::size_t shared = 0;
  for (const auto& p : a.people()) shared += firsts[p.firstname] > 1;
  CHECK(shared * 10 >= a.size());
  CHECK(multi * 10 >= a.size() * 3);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) CHECK(a.person(i).fullname() != a.person(j).fullname());
}

TEST_CASE("small directories still satisfy the ambiguity and phone quotas") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed)
    for (std::size_t n : {2u, 3u, 5u, 10u}) {
      const auto d = generate_directory(seed, n);
      std::map<std::string, int> firsts;
      for (const auto& p : d.people()) ++firsts[p.firstname];
      std::size_t shared = 0, multi = 0;
      for (const auto& p : d.people()) {
        shared += firsts[p.firstname] > 1;
        multi += p.phones.size() >= 2;
      }
      CHECK(shared * 10 >= n);
      CHECK(multi * 10 >= n * 3);
      if (n == 2) CHECK(d.person(0).firstname == d.person(1).firstname);
    }
  CHECK_THROWS_AS(generate_directory(1, 1), UsageError);
}

TEST_CASE("directory text round trip") {
  const auto d = generate_directory(7, 20);
  CHECK(parse_directory(format_directory(d)) == d);
  CHECK_THROWS_AS(parse_directory("Joe||Adamson|pager:1\n"), DataError);
  CHECK_THROWS_AS(parse_directory("Joe|Adamson\n"), DataError);
}

TEST_CASE("phone type synonyms") {
  CHECK(canonical_phonetype("cell") == "mobile");
  CHECK(canonical_phonetype("Office") == "work");
  CHECK(canonical_phonetype("home") == "home");
  CHECK_FALSE(canonical_phonetype("pager"));
}

TEST_CASE("user events parse into mentions") {
  const auto m = parse_user_event("firstname=Joe lastname=Adamson phonetype=cell intent=yes bogus");
  REQUIRE(m.size() == 4);
  CHECK(m[0].type == "firstname");
  CHECK(m[1].value == "Adamson");
  CHECK(m[3].type == "intent");
  CHECK(parse_user_event("").empty());
  CHECK(parse_user_event("color=red").empty());
}

TEST_CASE("most recent entity wins") {
  Harness h;
  h.system(kGreet);
  h.user("firstname=Joe");
  CHECK(h.s().firstname == "Joe");
  CHECK(h.s().candidates.size() == 2);
  h.user("firstname=Joe lastname=Adamson");
  CHECK(h.s().firstname == "Joe");
  CHECK(h.s().lastname == "Adamson");
  CHECK(h.s().candidates == std::vector<std::size_t>{0});
  const auto before = h.s().candidates;
  h.user("");
  CHECK(h.s().candidates == before);
  CHECK(h.s().lastname == "Adamson");
}

TEST_CASE("nicknames normalize when unambiguous") {
  Harness h;
  h.user("nickname=Mike");
  CHECK(h.s().firstname == "Michael");
  CHECK(h.s().said_first == "Mike");
  CHECK(h.s().candidates == std::vector<std::size_t>{3});
  h.user("nickname=Alex");
  CHECK_FALSE(h.s().firstname);
  CHECK(h.s().candidates.size() == 2);
}

TEST_CASE("mask rules") {
  Harness h;
  auto m = h.pack.action_mask(h.state);
  CHECK(m.size() == 14);
  CHECK(m.test(kGreet));
  CHECK(m.test(kAskFullname));
  CHECK_FALSE(m.test(kPlaceCall));
  CHECK_FALSE(m.test(kAnnounceCall));
  CHECK_FALSE(m.test(kSavePhonetypeavail));
  CHECK_FALSE(m.test(kDisambiguate));
  CHECK_FALSE(m.test(kSorryNoSuchPerson));
  CHECK_FALSE(m.test(kConfirmFallback));
  h.system(kGreet);
  m = h.pack.action_mask(h.state);
  CHECK_FALSE(m.test(kGreet));
  CHECK(m.test(kGoodbye));
  h.user("firstname=Joe");
  m = h.pack.action_mask(h.state);
  CHECK(m.test(kDisambiguate));
  CHECK_FALSE(m.test(kSavePhonetypeavail));
  h.user("lastname=Adamson");
  m = h.pack.action_mask(h.state);
  CHECK(m.test(kSavePhonetypeavail));
  CHECK_FALSE(m.test(kPlaceCall));
  CHECK_FALSE(m.test(kDisambiguate));
  h.system(kSavePhonetypeavail);
  m = h.pack.action_mask(h.state);
  CHECK(h.s().resolved());
  CHECK(m.test(kPlaceCall));
  CHECK(m.test(kAnnounceCall));
  CHECK_FALSE(m.test(kSavePhonetypeavail));
  h.user("lastname=Nobody");
  m = h.pack.action_mask(h.state);
  CHECK(m.test(kSorryNoSuchPerson));
  CHECK_FALSE(m.test(kPlaceCall));
}

TEST_CASE("an unmasked pack permits everything and tolerates failed API calls") {
  const auto dir = std::make_shared<const Directory>(generate_directory(3, 40));
  DialerPack pack(dir, false);
  auto state = pack.initial_state();
  CHECK(pack.action_mask(state).count() == 14);
  CHECK(pack.dispatch_api(pack.action(kPlaceCall), "PlaceCall()", state).text.find("error") == 0);
  CHECK(pack.dispatch_api(pack.action(kSavePhonetypeavail), "SavePhonetypeavail()", state)
            .text.find("error") == 0);
}

TEST_CASE("first example dialog: disambiguation then call") {
  Harness h;
  CHECK(h.system(kGreet) == "How can I help you?");
  h.user("firstname=Joe");
  CHECK(h.system(kDisambiguate) ==
        "There's more than one person named Joe. Can you say their full name?");
  h.user("firstname=Joe lastname=Adamson");
  CHECK(h.system(kSavePhonetypeavail) == "SavePhonetypeavail()");
  CHECK(h.system(kAnnounceCall) == "Calling Joe Adamson, work");
  CHECK(h.s().phonenumber == "555-0101");
  CHECK(h.system(kPlaceCall) == "PlaceCall()");
}

TEST_CASE("second example dialog: fallback declined") {
  Harness h;
  h.system(kGreet);
  h.user("firstname=Sally phonetype=home");
  h.system(kSavePhonetypeavail);
  CHECK(h.s().type_unavailable());
  CHECK_FALSE(h.pack.action_mask(h.state).test(kPlaceCall));
  CHECK(h.system(kConfirmFallback) ==
        "Sorry, I don't have a home number for Sally Smith. I only have a work phone. Do you want "
        "to call that number?");
  CHECK(h.s().confirm_pending);
  h.user("intent=no");
  CHECK(h.s().declined);
  CHECK_FALSE(h.pack.action_mask(h.state).test(kPlaceCall));
  CHECK(h.system(kGoodbye) == "Oh, sorry about that. Goodbye.");
}

TEST_CASE("accepted fallback resolves to the other phone") {
  Harness h;
  h.system(kGreet);
  h.user("firstname=Sally phonetype=home");
  h.system(kSavePhonetypeavail);
  h.system(kConfirmFallback);
  h.user("intent=yes");
  CHECK(h.s().resolved_type() == "work");
  CHECK(h.system(kAnnounceCall) == "Calling Sally Smith, work");
}

TEST_CASE("context features") {
  Harness h;
  CHECK(h.pack.context_size() == 17);
  CHECK(h.pack.context_features(h.state, {}).size() == 17);
  CHECK(h.pack.context_features(h.state, {}).isZero());
  h.system(kGreet);
  h.system(kAskFullname);
  h.user("nickname=Mike");
  auto f = h.pack.context_features(h.state, {});
  CHECK(f[0] == 0.0);
  CHECK(f[1] == 1.0);
  CHECK(f[4] == 0.0);
  CHECK(f[6] == 1.0);
  CHECK(f[12] == 0.0);
  h.system(kSavePhonetypeavail);
  f = h.pack.context_features(h.state, {});
  CHECK(f[3] == 0.0);
  CHECK(f[10] == 1.0);
  h.system(kAskPhonetype);
  h.user("");
  f = h.pack.context_features(h.state, {});
  CHECK(f[12] == 1.0);
  h.system(kAskPhonetype);
  h.user("phonetype=cell lastname=Lee");
  f = h.pack.context_features(h.state, {});
  CHECK(f[12] == 0.0);
  CHECK(f[13] == 1.0);
  CHECK(f[3] == 1.0);
  CHECK(f[4] == 1.0);
  CHECK(f[8] == 1.0);
  CHECK(f[9] == 0.0);
}

TEST_CASE("compute_return") {
  CHECK(compute_return(1, true) == 1.0);
  CHECK(compute_return(3, true) == doctest::Approx(0.9025).epsilon(1e-12));
  CHECK(compute_return(5, false) == 0.0);
  CHECK_THROWS_AS(compute_return(0, true), UsageError);
}

TEST_CASE("simulator config file") {
  const auto c = parse_simulator_config("# comment\np_give_up = 0.5\nmax_turns=12\n\n");
  CHECK(c.p_give_up == 0.5);
  CHECK(c.max_turns == 12);
  CHECK(c.p_restate == SimulatorConfig{}.p_restate);
  const auto back = parse_simulator_config(format_simulator_config(c));
  CHECK(back.p_give_up == c.p_give_up);
  CHECK(back.max_turns == 12);
  CHECK_THROWS_AS(parse_simulator_config("p_give_up = 1.5\n"), UsageError);
  CHECK_THROWS_AS(parse_simulator_config("p_unknown = 0.5\n"), DataError);
  CHECK_THROWS_AS(parse_simulator_config("p_give_up = abc\n"), DataError);
}

namespace {

struct Rollout {
  engine::Episode episode;
  UserGoal goal;
};

Rollout run(const SimulatorConfig& config, std::uint64_t seed,
            std::shared_ptr<const Directory> dir = nullptr) {
  if (!dir) dir = std::make_shared<const Directory>(generate_directory(3, 40));
  DialerPack pack(dir);
  features::Featurizer fz(std::nullopt, nullptr, 17, 0);
  const auto params = neural::init_parameters(17, 14, 4, 1);
  UserSimulator sim(dir, config);
  std::mt19937_64 rng(seed);
  auto session = engine::new_session(pack, fz, params);
  auto ep = engine::run_episode(session, sim, oracle_chooser(), rng);
  return {std::move(ep), sim.goal()};
}

}  // namespace

TEST_CASE("cooperative user and oracle policy always succeed") {
  const auto config = SimulatorConfig::cooperative();
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto r = run(config, seed);
    CHECK(r.episode.success);
    CHECK(r.episode.turns() <= config.max_turns);
    CHECK(r.episode.steps.back().action == kPlaceCall);
    for (const auto& s : r.episode.steps) CHECK(s.mask.test(s.action));
  }
}

TEST_CASE("a user who always gives up quits at the first unhelpful turn") {
  auto config = SimulatorConfig::cooperative();
  config.p_give_up = 1.0;
  const auto dir = std::make_shared<const Directory>(generate_directory(3, 40));
  DialerPack pack(dir);
  features::Featurizer fz(std::nullopt, nullptr, 17, 0);
  const auto params = neural::init_parameters(17, 14, 4, 1);
  const engine::ActionChooser stalling = [](const neural::ActionDistribution&,
                                            const ActionMask& mask, const engine::EntityState&) {
    return mask.test(kGreet) ? ActionId{kGreet} : ActionId{kReprompt};
  };
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    UserSimulator sim(dir, config);
    std::mt19937_64 rng(seed);
    auto session = engine::new_session(pack, fz, params);
    const auto ep = engine::run_episode(session, sim, stalling, rng);
    CHECK_FALSE(ep.success);
    CHECK(ep.turns() == 2);
    CHECK(compute_return(ep.turns(), ep.success) == 0.0);
  }
  // The oracle is never unhelpful with a cooperative user, so nobody quits.
  for (std::uint64_t seed = 1; seed <= 20; ++seed) CHECK(run(config, seed).episode.success);
}

TEST_CASE("out-of-coverage names never succeed") {
  auto config = SimulatorConfig::cooperative();
  config.p_out_of_coverage_name = 1.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto r = run(config, seed);
    CHECK_FALSE(r.goal.person);
    CHECK_FALSE(r.episode.success);
  }
}

TEST_CASE("default simulator: bounded episodes, masked actions only, deterministic") {
  const SimulatorConfig config;
  std::size_t successes = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto r = run(config, seed);
    CHECK(r.episode.turns() >= 1);
    CHECK(r.episode.turns() <= config.max_turns);
    for (const auto& s : r.episode.steps) CHECK(s.mask.test(s.action));
    const double g = compute_return(r.episode.turns(), r.episode.success);
    CHECK((g == 0.0 || (g > 0.0 && g <= 1.0)));
    successes += r.episode.success;
    const auto again = run(config, seed);
    REQUIRE(again.episode.turns() == r.episode.turns());
    for (std::size_t t = 0; t < r.episode.turns(); ++t)
      CHECK(again.episode.steps[t].rendered == r.episode.steps[t].rendered);
  }
  CHECK(successes > 100);
}

TEST_CASE("two-person directory reaches disambiguation") {
  auto dir = std::make_shared<const Directory>(generate_directory(5, 2));
  auto config = SimulatorConfig::cooperative();
  config.p_answer_fullname = 0.0;
  config.p_use_nickname = 0.0;
  const auto r = run(config, 1, dir);
  CHECK(r.episode.success);
  CHECK(std::any_of(r.episode.steps.begin(), r.episode.steps.end(),
                    [](const engine::StepRecord& s) { return s.action == kDisambiguate; }));
}

TEST_CASE("oracle dialogs are labeled and mask-consistent") {
  const DialerPack pack(std::make_shared<const Directory>(generate_directory(1, 40)));
  const auto dialogs = collect_oracle_dialogs(pack, SimulatorConfig{}, 21, 9);
  CHECK(dialogs.size() == 21);
  for (const auto& d : dialogs) {
    REQUIRE(d.size() > 0);
    CHECK(d.labels.front() == kGreet);
    for (std::size_t t = 0; t < d.size(); ++t) {
      CHECK(d.masks[t].test(d.labels[t]));
      CHECK(d.observations[t].size() == 17);
    }
  }
}
