#include <cmath>

#include <doctest.h>

#include "hcn/neural/lstm.hpp"
#include "hcn/neural/optimizer.hpp"
#include "hcn/util/error.hpp"
#include "support/finite_difference.hpp"
#include "support/random_fixtures.hpp"

using namespace hcn;
using namespace hcn::neural;

namespace {

double cross_entropy(const LstmParameters& p, const testing::DialogFixture& f) {
  auto dists = forward_dialog(p, f.observations, f.masks, f.labels);
  double loss = 0.0;
  for (std::size_t t = 0; t < dists.size(); ++t) loss -= std::log(dists[t][f.labels[t]]);
  return loss;
}

}  // namespace

TEST_CASE("supervised gradients agree with central differences (10 seeds)") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    CAPTURE(seed);
    auto f = testing::make_dialog_fixture(seed, 5, 4, 8, 3);
    auto analytic = supervised_gradients(f.params, f.observations, f.masks, f.labels);
    CHECK(analytic.loss == doctest::Approx(cross_entropy(f.params, f)).epsilon(1e-12));
    auto numeric = testing::numeric_gradient(
        f.params, [&](const LstmParameters& p) { return cross_entropy(p, f); });
    CHECK(testing::max_relative_error(analytic.gradients.tensors, numeric) <= 1e-4);
  }
}

TEST_CASE("a network certain of every label has zero loss and zero gradient") {
  auto f = testing::make_dialog_fixture(3, 5, 4, 8, 3);
  for (std::size_t t = 0; t < f.masks.size(); ++t) {
    f.masks[t] = ActionMask(4);
    f.masks[t].set(f.labels[t]);
  }
  auto r = supervised_gradients(f.params, f.observations, f.masks, f.labels);
  CHECK(r.loss == 0.0);
  CHECK(r.gradients.squared_norm() == 0.0);
}

TEST_CASE("supervised_gradients rejects labels the mask forbids") {
  auto f = testing::make_dialog_fixture(3, 5, 4, 8, 2);
  f.masks[1] = ActionMask::all(4);
  f.masks[1].set(f.labels[1], false);
  CHECK_THROWS_AS(supervised_gradients(f.params, f.observations, f.masks, f.labels), DataError);
}

TEST_CASE("loss decreases monotonically over five AdaDelta steps on one dialog") {
  auto f = testing::make_dialog_fixture(17, 6, 4, 8, 4);
  auto opt = AdaDeltaState::zeros(f.params.shape);
  double previous = cross_entropy(f.params, f);
  for (int step = 0; step < 5; ++step) {
    auto r = supervised_gradients(f.params, f.observations, f.masks, f.labels);
    adadelta_step(f.params, clip_global_norm(r.gradients, 1.0), opt);
    const double now = cross_entropy(f.params, f);
    CHECK(now < previous);
    previous = now;
  }
}

TEST_CASE("reinforce gradients") {
  auto f = testing::make_dialog_fixture(23, 5, 4, 8, 3);
  auto dists = forward_dialog(f.params, f.observations, f.masks, f.labels);
  std::vector<double> behavior;
  for (std::size_t t = 0; t < dists.size(); ++t) behavior.push_back(dists[t][f.labels[t]]);

  SUBCASE("G equal to b gives a zero gradient") {
    auto g = reinforce_gradients(f.params, f.observations, f.masks, f.labels, behavior, 0.7, 0.7);
    CHECK(g.squared_norm() == 0.0);
  }

  SUBCASE("unit advantage equals the negated cross-entropy gradient") {
    auto fa = testing::make_dialog_fixture(29, 5, 4, 8, 3, /*masked=*/false);
    auto d = forward_dialog(fa.params, fa.observations, fa.masks, fa.labels);
    std::vector<double> b;
    for (std::size_t t = 0; t < d.size(); ++t) b.push_back(d[t][fa.labels[t]]);
    auto rl = reinforce_gradients(fa.params, fa.observations, fa.masks, fa.labels, b, 1.0, 0.0);
    auto sl = supervised_gradients(fa.params, fa.observations, fa.masks, fa.labels);
    sl.gradients *= -1.0;
    CHECK(testing::max_relative_error(rl.tensors, sl.gradients.tensors) <= 1e-12);
  }

  SUBCASE("analytic log-prob gradient agrees with central differences") {
    auto g = reinforce_gradients(f.params, f.observations, f.masks, f.labels, behavior, 1.5, 0.5);
    auto numeric = testing::numeric_gradient(f.params, [&](const LstmParameters& p) {
      return sequence_log_prob(p, f.observations, f.masks, f.labels);
    });
    CHECK(testing::max_relative_error(g.tensors, numeric) <= 1e-4);
  }

  SUBCASE("a positive-advantage ascent step raises the log-probability of the taken actions") {
    auto params = f.params;
    auto opt = AdaDeltaState::zeros(params.shape);
    const double before = sequence_log_prob(params, f.observations, f.masks, f.labels);
    auto g = reinforce_gradients(params, f.observations, f.masks, f.labels, behavior, 1.0, 0.2);
    g *= -1.0;
    adadelta_step(params, clip_global_norm(g, 1.0), opt);
    const double after = sequence_log_prob(params, f.observations, f.masks, f.labels);
    CHECK(after > before);
  }

  SUBCASE("zero recorded probability is rejected") {
    behavior[1] = 0.0;
    CHECK_THROWS_AS(
        reinforce_gradients(f.params, f.observations, f.masks, f.labels, behavior, 1.0, 0.0),
        DataError);
  }
}
