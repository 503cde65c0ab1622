#include <cmath>
#include <random>

#include <doctest.h>

#include "hcn/neural/lstm.hpp"
#include "hcn/neural/optimizer.hpp"
#include "hcn/util/error.hpp"
#include "support/random_fixtures.hpp"

using namespace hcn;
using namespace hcn::neural;
using Eigen::VectorXd;

namespace {

bool bit_identical(const LstmTensors& a, const LstmTensors& b) {
  bool same = true;
  auto aa = a;
  zip_tensors(aa, b, [&](const auto& x, const auto& y) { same = same && (x.array() == y.array()).all(); });
  return same;
}

double scalar_logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

TEST_CASE("init_parameters sizes the input from obs, previous action and mask") {
  CHECK(init_parameters(389, 16, 128, 7).shape.input_dim() == 421);
  CHECK(init_parameters(17, 14, 32, 7).shape.input_dim() == 45);
  auto p = init_parameters(17, 14, 32, 7);
  CHECK(p.tensors.input_weights.rows() == 4 * 32);
  CHECK(p.tensors.input_weights.cols() == 45);
  CHECK(p.tensors.output_weights.rows() == 14);
}

TEST_CASE("init_parameters is deterministic and Glorot bounded") {
  auto a = init_parameters(10, 4, 8, 7);
  auto b = init_parameters(10, 4, 8, 7);
  auto c = init_parameters(10, 4, 8, 8);
  CHECK(bit_identical(a.tensors, b.tensors));
  CHECK_FALSE(bit_identical(a.tensors, c.tensors));

  const double limit_in = std::sqrt(6.0 / (8 + a.shape.input_dim()));
  CHECK(a.tensors.input_weights.cwiseAbs().maxCoeff() <= limit_in);
  const double limit_out = std::sqrt(6.0 / (8 + 4));
  CHECK(a.tensors.output_weights.cwiseAbs().maxCoeff() <= limit_out);

  CHECK(a.tensors.gate_bias(Gate::forget).isOnes());
  CHECK(a.tensors.gate_bias(Gate::input).isZero());
  CHECK(a.tensors.gate_bias(Gate::cell).isZero());
  CHECK(a.tensors.gate_bias(Gate::output).isZero());
  CHECK(a.tensors.output_bias.isZero());
}

TEST_CASE("init_parameters rejects empty dimensions") {
  CHECK_THROWS_AS(init_parameters(0, 4, 8, 1), DimensionError);
  CHECK_THROWS_AS(init_parameters(4, 0, 8, 1), DimensionError);
  CHECK_THROWS_AS(init_parameters(4, 4, 0, 1), DimensionError);
}

TEST_CASE("lstm_step with all-zero parameters stays at zero") {
  LstmParameters p{{3, 2, 4}, LstmTensors::zeros({3, 2, 4})};
  VectorXd x = VectorXd::LinSpaced(7, -1.0, 2.0);
  auto s = lstm_step(p, LstmState::zeros(4), x);
  CHECK(s.hidden.isZero());
  CHECK(s.cell.isZero());
}

TEST_CASE("lstm_step matches a scalar evaluation of the recurrence") {
  // obs 1, actions 1 -> input_dim 3, one hidden unit.
  LstmParameters p{{1, 1, 1}, LstmTensors::zeros({1, 1, 1})};
  const double w[4][3] = {{0.3, -0.2, 0.5}, {-0.4, 0.1, 0.2}, {0.7, 0.6, -0.3}, {0.2, -0.5, 0.4}};
  const double u[4] = {0.25, -0.35, 0.45, 0.15};
  const double b[4] = {0.1, 1.0, -0.2, 0.05};
  for (int g = 0; g < 4; ++g) {
    for (int k = 0; k < 3; ++k) p.tensors.input_weights(g, k) = w[g][k];
    p.tensors.recurrent_weights(g, 0) = u[g];
    p.tensors.gate_biases(g) = b[g];
  }
  const double x[3] = {0.8, 1.0, 1.0};
  const double h0 = 0.3, c0 = -0.6;

  auto pre = [&](int g) { return w[g][0] * x[0] + w[g][1] * x[1] + w[g][2] * x[2] + u[g] * h0 + b[g]; };
  const double i = scalar_logistic(pre(0));
  const double f = scalar_logistic(pre(1));
  const double gg = std::tanh(pre(2));
  const double o = scalar_logistic(pre(3));
  const double c1 = f * c0 + i * gg;
  const double h1 = o * std::tanh(c1);

  LstmState s0{VectorXd::Constant(1, h0), VectorXd::Constant(1, c0)};
  auto s1 = lstm_step(p, s0, VectorXd::Map(x, 3));
  CHECK(s1.cell(0) == doctest::Approx(c1).epsilon(1e-14));
  CHECK(s1.hidden(0) == doctest::Approx(h1).epsilon(1e-14));
}

TEST_CASE("lstm_step depends on the recurrent state") {
  auto p = init_parameters(3, 2, 4, 11);
  VectorXd x = VectorXd::Constant(7, 0.5);
  auto s1 = lstm_step(p, LstmState::zeros(4), x);
  auto s2 = lstm_step(p, s1, x);
  CHECK((s1.hidden - s2.hidden).norm() > 1e-6);
}

TEST_CASE("lstm_step rejects bad inputs") {
  auto p = init_parameters(3, 2, 4, 11);
  CHECK_THROWS_AS(lstm_step(p, LstmState::zeros(4), VectorXd::Zero(6)), DimensionError);
  VectorXd bad = VectorXd::Zero(7);
  bad(2) = std::nan("");
  CHECK_THROWS_AS(lstm_step(p, LstmState::zeros(4), bad), DataError);
}

TEST_CASE("output_distribution renormalizes over the mask") {
  LstmParameters p{{1, 3, 2}, LstmTensors::zeros({1, 3, 2})};
  p.tensors.output_bias << std::log(0.5), std::log(0.3), std::log(0.2);
  VectorXd h = VectorXd::Zero(2);

  ActionMask m(3);
  m.set(0);
  m.set(2);
  auto d = output_distribution(p, h, m);
  CHECK(d[0] == doctest::Approx(0.714286).epsilon(1e-6));
  CHECK(d[1] == 0.0);
  CHECK(d[2] == doctest::Approx(0.285714).epsilon(1e-6));

  auto full = output_distribution(p, h, ActionMask::all(3));
  CHECK(full[0] == doctest::Approx(0.5));
  CHECK(full[1] == doctest::Approx(0.3));
  CHECK(full[2] == doctest::Approx(0.2));

  ActionMask single(3);
  single.set(1);
  auto one = output_distribution(p, h, single);
  CHECK(one[0] == 0.0);
  CHECK(one[1] == 1.0);
  CHECK(one[2] == 0.0);

  CHECK_THROWS_AS(output_distribution(p, h, ActionMask(3)), DataError);
}

TEST_CASE("masked distributions: zeros where masked, sum to one (1000 random cases)") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> logit(0.0, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + trial % 15;
    LstmParameters p{{1, n, 1}, LstmTensors::zeros({1, n, 1})};
    for (std::size_t k = 0; k < n; ++k) p.tensors.output_bias(static_cast<Eigen::Index>(k)) = logit(rng);
    auto mask = testing::random_mask(n, rng, 0.5);
    auto d = output_distribution(p, VectorXd::Zero(1), mask);
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (!mask.test(k)) REQUIRE(d[k] == 0.0);
      REQUIRE(d[k] >= 0.0);
      sum += d[k];
    }
    REQUIRE(std::abs(sum - 1.0) <= 1e-9);
  }
}

TEST_CASE("forward_dialog: first turn has no previous action, outputs are causal") {
  auto f = testing::make_dialog_fixture(5, 6, 4, 8, 3);
  auto one = forward_dialog(f.params, std::span(f.observations).first(1),
                            std::span(f.masks).first(1), std::span(f.labels).first(1));
  REQUIRE(one.size() == 1);
  auto x0 = build_input(f.params.shape, f.observations[0], std::nullopt, f.masks[0]);
  CHECK(x0.segment(6, 4).isZero());

  auto base = forward_dialog(f.params, f.observations, f.masks, f.labels);
  auto altered = f.observations;
  altered[2] *= -3.0;
  auto changed = forward_dialog(f.params, altered, f.masks, f.labels);
  CHECK((base[0].probs.array() == changed[0].probs.array()).all());
  CHECK((base[1].probs.array() == changed[1].probs.array()).all());
  CHECK((base[2].probs - changed[2].probs).norm() > 0.0);

  CHECK_THROWS_AS(forward_dialog(f.params, f.observations, std::span(f.masks).first(2), f.labels),
                  DimensionError);
}
