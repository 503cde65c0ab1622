#include <doctest.h>

#include <array>

#include "hcn/engine/session.hpp"
#include "hcn/util/error.hpp"

using namespace hcn;
using namespace hcn::engine;

namespace {

struct CityState {
  std::optional<std::string> city;
};

class CityPack final : public DomainPack {
 public:
  explicit CityPack(bool empty_mask = false) : empty_mask_(empty_mask) {
    templates_ = {{0, ActionKind::text, "hello", {}},
                  {1, ActionKind::text, "<city>, right?", {}},
                  {2, ActionKind::api, "lookup <city>", "lookup"}};
  }
  const std::vector<ActionTemplate>& templates() const override { return templates_; }
  std::size_t context_size() const override { return 1; }
  EntityState initial_state() const override { return CityState{}; }
  Mentions extract_entities(std::string_view text) const override {
    Mentions out;
    for (std::string_view city : {"Seattle", "Boston"})
      if (text.find(city) != std::string_view::npos) out.push_back({"city", std::string(city), 0, 1});
    return out;
  }
  void update_state(EntityState& state, const Mentions& mentions,
                    std::string_view) const override {
    for (const auto& m : mentions) std::any_cast<CityState&>(state).city = m.value;
  }
  ActionMask action_mask(const EntityState& state) const override {
    if (empty_mask_) return ActionMask(3);
    ActionMask m = ActionMask::all(3);
    const bool known = std::any_cast<const CityState&>(state).city.has_value();
    m.set(1, known);
    m.set(2, known);
    return m;
  }
  Eigen::VectorXd context_features(const EntityState& state, const Mentions&) const override {
    return Eigen::VectorXd::Constant(1, std::any_cast<const CityState&>(state).city ? 1.0 : 0.0);
  }
  std::optional<std::string> slot_value(const EntityState& state, const ActionTemplate&,
                                        std::string_view slot) const override {
    if (slot == "city") return std::any_cast<const CityState&>(state).city;
    return std::nullopt;
  }
  ApiResult dispatch_api(const ActionTemplate&, std::string_view rendered,
                         EntityState&) const override {
    return {"result for " + std::string(rendered), {}};
  }

 private:
  bool empty_mask_;
  std::vector<ActionTemplate> templates_;
};

struct Fixture {
  CityPack pack;
  std::shared_ptr<features::EmbeddingTable> table;
  features::Featurizer featurizer;
  neural::LstmParameters params;

  explicit Fixture(bool empty_mask = false, std::uint64_t seed = 3)
      : pack(empty_mask),
        featurizer(features::Vocabulary({"hi", "in", "seattle", "boston"}), nullptr, 1, 0),
        params(neural::init_parameters(featurizer.obs_size(), 3, 6, seed)) {}
};

ActionChooser fixed(std::vector<ActionId> script) {
  auto i = std::make_shared<std::size_t>(0);
  return [script, i](const neural::ActionDistribution&, const ActionMask&, const EntityState&) {
    return script.at((*i)++);
  };
}

}  // namespace

TEST_CASE("greedy selection") {
  std::mt19937_64 rng(1);
  CHECK(select_action({Eigen::Vector3d(0.2, 0.5, 0.3)}, SelectionMode::greedy, rng) == 1);
  CHECK(select_action({Eigen::Vector3d(0.5, 0.5, 0.0)}, SelectionMode::greedy, rng) == 0);
}

TEST_CASE("sampling frequencies match the distribution") {
  std::mt19937_64 rng(2024);
  std::array<int, 3> counts{};
  const neural::ActionDistribution d{Eigen::Vector3d(0.25, 0.75, 0.0)};
  for (int i = 0; i < 10000; ++i) ++counts[select_action(d, SelectionMode::sample, rng)];
  CHECK(std::abs(counts[0] / 10000.0 - 0.25) <= 0.02);
  CHECK(std::abs(counts[1] / 10000.0 - 0.75) <= 0.02);
  CHECK(counts[2] == 0);
}

TEST_CASE("render_action") {
  CityPack pack;
  CHECK(render_action(pack, pack.action(1), CityState{"Seattle"}) == "Seattle, right?");
  CHECK(render_action(pack, pack.action(0), CityState{}) == "hello");
  try {
    render_action(pack, pack.action(1), CityState{});
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("<city>") != std::string::npos);
  }
  CHECK(template_slots("<a> and <b>") == std::vector<std::string>{"a", "b"});
}

TEST_CASE("new_session checks dimensions") {
  Fixture f;
  CHECK_NOTHROW(new_session(f.pack, f.featurizer, f.params));
  const auto wrong_actions = neural::init_parameters(f.featurizer.obs_size(), 14, 6, 1);
  CHECK_THROWS_AS(new_session(f.pack, f.featurizer, wrong_actions), DimensionError);
  const auto wrong_obs = neural::init_parameters(f.featurizer.obs_size() + 1, 3, 6, 1);
  CHECK_THROWS_AS(new_session(f.pack, f.featurizer, wrong_obs), DimensionError);
}

TEST_CASE("fresh session state") {
  Fixture f;
  const auto s = new_session(f.pack, f.featurizer, f.params);
  CHECK(s.lstm_state().hidden.isZero());
  CHECK(s.lstm_state().cell.isZero());
  CHECK_FALSE(s.previous_action());
  CHECK(s.transcript().empty());
  CHECK_FALSE(std::any_cast<const CityState&>(s.entity_state()).city);
}

TEST_CASE("step-by-step replay equals forward_dialog bitwise") {
  Fixture f;
  auto s = new_session(f.pack, f.featurizer, f.params);
  const std::vector<std::string> user{"hi", "in Seattle", "", "Boston", "hi"};
  const std::vector<ActionId> actions{0, 1, 2, 1, 0};
  const auto choose = fixed(actions);
  std::vector<Eigen::VectorXd> obs;
  std::vector<ActionMask> masks;
  std::vector<neural::ActionDistribution> live;
  for (const auto& u : user) {
    const auto rec = s.step(u, choose);
    obs.push_back(rec.observation);
    masks.push_back(rec.mask);
    live.push_back(rec.distribution);
  }
  const auto batch = neural::forward_dialog(f.params, obs, masks, actions);
  REQUIRE(batch.size() == live.size());
  for (std::size_t t = 0; t < live.size(); ++t) CHECK((batch[t].probs.array() == live[t].probs.array()).all());
}

TEST_CASE("step output and transcript") {
  Fixture f;
  auto s = new_session(f.pack, f.featurizer, f.params);
  auto rec = s.step("hi", fixed({0}));
  CHECK(rec.rendered == "hello");
  CHECK(rec.kind == ActionKind::text);
  CHECK(s.transcript().size() == 2);
  CHECK(s.previous_action() == 0u);
  rec = s.step("in Seattle", fixed({2}));
  CHECK(rec.kind == ActionKind::api);
  CHECK(rec.rendered == "lookup Seattle");
  CHECK(rec.api_result == "result for lookup Seattle");
  REQUIRE(s.transcript().size() == 4);
  CHECK(s.transcript()[2].speaker == Speaker::user);
  CHECK(s.transcript()[3].speaker == Speaker::api);
  CHECK(format_transcript_line(s.transcript()[3]) == "API: lookup Seattle");
  CHECK(format_transcript_line({Speaker::user, ""}) == "USER: <SILENCE>");
  CHECK(format_transcript_line({Speaker::system, "hello"}) == "SYS: hello");
}

TEST_CASE("masked choice is rejected") {
  Fixture f;
  auto s = new_session(f.pack, f.featurizer, f.params);
  CHECK_THROWS_AS(s.step("hi", fixed({1})), DataError);
}

TEST_CASE("greedy steps never pick masked actions") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Fixture f(false, seed);
    auto s = new_session(f.pack, f.featurizer, f.params);
    std::mt19937_64 rng(seed);
    for (const char* u : {"hi", "hello there", "in Boston", "hi"}) {
      const auto rec = s.step(u, SelectionMode::sample, rng);
      CHECK(rec.mask.test(rec.action));
      CHECK(rec.distribution.probs.sum() == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("all-zero mask falls back to the unmasked softmax") {
  Fixture f(true);
  auto s = new_session(f.pack, f.featurizer, f.params);
  std::mt19937_64 rng(1);
  const auto rec = s.step("hi", SelectionMode::greedy, rng);
  CHECK(rec.mask_fallback);
  CHECK(rec.mask.count() == 3);
}

TEST_CASE("greedy is deterministic and sessions are isolated") {
  Fixture f;
  auto a = new_session(f.pack, f.featurizer, f.params);
  auto b = new_session(f.pack, f.featurizer, f.params);
  std::mt19937_64 rng(1);
  a.step("in Seattle", SelectionMode::greedy, rng);
  a.step("hi", SelectionMode::greedy, rng);
  CHECK(b.transcript().empty());
  CHECK(b.lstm_state().hidden.isZero());
  auto c = new_session(f.pack, f.featurizer, f.params);
  c.step("in Seattle", SelectionMode::greedy, rng);
  b.step("in Seattle", SelectionMode::greedy, rng);
  const auto rb = b.step("hi", SelectionMode::greedy, rng);
  const auto rc = c.step("hi", SelectionMode::greedy, rng);
  CHECK(rb.action == rc.action);
  CHECK((rb.distribution.probs.array() == rc.distribution.probs.array()).all());
}

TEST_CASE("respond chains api actions with silence") {
  Fixture f;
  auto s = new_session(f.pack, f.featurizer, f.params);
  std::mt19937_64 rng(1);
  const auto steps = s.respond("in Seattle", SelectionMode::greedy, rng);
  REQUIRE_FALSE(steps.empty());
  CHECK(steps.back().kind == ActionKind::text);
  for (std::size_t i = 0; i + 1 < steps.size(); ++i) CHECK(steps[i].kind == ActionKind::api);
  CHECK(s.transcript().size() == 2 * steps.size());
}
