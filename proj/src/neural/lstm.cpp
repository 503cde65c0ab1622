#include "hcn/neural/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <fmt/format.h>

#include "hcn/util/error.hpp"

namespace hcn::neural {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index idx(std::size_t n) { return static_cast<Index>(n); }

double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

void glorot_fill(Eigen::Ref<MatrixXd> m, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  std::uniform_real_distribution<double> dist(-limit, limit);
  // Row-major fill so the draw order matches the checkpoint layout.
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) m(r, c) = dist(rng);
}

void check_sequences(const LstmShape& shape, std::span<const VectorXd> observations,
                     std::span<const ActionMask> masks, std::size_t history_len) {
  if (observations.empty()) throw DimensionError("dialog has no turns");
  if (masks.size() != observations.size() || history_len != observations.size())
    throw DimensionError(fmt::format(
        "sequence length mismatch: {} observations, {} masks, {} actions",
        observations.size(), masks.size(), history_len));
  for (std::size_t t = 0; t < observations.size(); ++t) {
    if (static_cast<std::size_t>(observations[t].size()) != shape.obs_size)
      throw DimensionError(fmt::format("observation {} has length {}, expected {}", t,
                                       observations[t].size(), shape.obs_size));
    if (masks[t].size() != shape.action_count)
      throw DimensionError(fmt::format("mask {} has length {}, expected {}", t,
                                       masks[t].size(), shape.action_count));
  }
}

// Everything the backward pass needs from one forward turn.
struct TurnCache {
  VectorXd x;
  VectorXd gates;  // activated, stacked [i; f; g; o]
  VectorXd cell;
  VectorXd tanh_cell;
  VectorXd hidden;
  VectorXd probs;  // masked distribution
};

struct StepOut {
  LstmState state;
  VectorXd gates;
};

StepOut step_with_gates(const LstmParameters& params, const LstmState& state,
                        const VectorXd& x) {
  const Index h = idx(params.shape.hidden);
  const auto& t = params.tensors;
  VectorXd pre = t.input_weights * x;
  pre.noalias() += t.recurrent_weights * state.hidden;
  pre += t.gate_biases;

  VectorXd gates(4 * h);
  for (Index k = 0; k < h; ++k) {
    gates(k) = logistic(pre(k));
    gates(h + k) = logistic(pre(h + k));
    gates(2 * h + k) = std::tanh(pre(2 * h + k));
    gates(3 * h + k) = logistic(pre(3 * h + k));
  }
  StepOut out;
  out.state.cell = gates.segment(h, h).cwiseProduct(state.cell) +
                   gates.segment(0, h).cwiseProduct(gates.segment(2 * h, h));
  out.state.hidden =
      gates.segment(3 * h, h).cwiseProduct(out.state.cell.array().tanh().matrix());
  out.gates = std::move(gates);
  return out;
}

// Masked forward pass keeping the per-turn cache.
std::vector<TurnCache> forward_cached(const LstmParameters& params,
                                      std::span<const VectorXd> observations,
                                      std::span<const ActionMask> masks,
                                      std::span<const ActionId> history) {
  std::vector<TurnCache> cache;
  cache.reserve(observations.size());
  LstmState state = LstmState::zeros(params.shape.hidden);
  for (std::size_t t = 0; t < observations.size(); ++t) {
    std::optional<ActionId> prev;
    if (t > 0) prev = history[t - 1];
    TurnCache turn;
    turn.x = build_input(params.shape, observations[t], prev, masks[t]);
    auto out = step_with_gates(params, state, turn.x);
    turn.gates = std::move(out.gates);
    state = std::move(out.state);
    turn.cell = state.cell;
    turn.tanh_cell = state.cell.array().tanh().matrix();
    turn.hidden = state.hidden;
    turn.probs = output_distribution(params, state.hidden, masks[t]).probs;
    cache.push_back(std::move(turn));
  }
  return cache;
}

// Gradient of −Σ_t weight_t · log q_t[target_t].
Gradients backward(const LstmParameters& params, const std::vector<TurnCache>& cache,
                   std::span<const ActionId> targets, std::span<const double> weights) {
  const auto& shape = params.shape;
  const auto& p = params.tensors;
  const Index h = idx(shape.hidden);
  const Index steps = idx(cache.size());

  MatrixXd d_logits(idx(shape.action_count), steps);
  MatrixXd d_pre(4 * h, steps);
  MatrixXd xs(idx(shape.input_dim()), steps);
  MatrixXd hs(h, steps);
  MatrixXd hs_prev = MatrixXd::Zero(h, steps);

  for (Index t = 0; t < steps; ++t) {
    const auto& turn = cache[static_cast<std::size_t>(t)];
    VectorXd dz = turn.probs;
    dz(idx(targets[static_cast<std::size_t>(t)])) -= 1.0;
    d_logits.col(t) = weights[static_cast<std::size_t>(t)] * dz;
    xs.col(t) = turn.x;
    hs.col(t) = turn.hidden;
    if (t > 0) hs_prev.col(t) = cache[static_cast<std::size_t>(t - 1)].hidden;
  }

  VectorXd dh_next = VectorXd::Zero(h);
  VectorXd dc_next = VectorXd::Zero(h);
  for (Index t = steps - 1; t >= 0; --t) {
    const auto& turn = cache[static_cast<std::size_t>(t)];
    const auto i = turn.gates.segment(0, h).array();
    const auto f = turn.gates.segment(h, h).array();
    const auto g = turn.gates.segment(2 * h, h).array();
    const auto o = turn.gates.segment(3 * h, h).array();
    const auto tc = turn.tanh_cell.array();

    VectorXd dh = p.output_weights.transpose() * d_logits.col(t);
    dh += dh_next;
    const Eigen::ArrayXd dc =
        dh.array() * o * (1.0 - tc.square()) + dc_next.array();
    const Eigen::ArrayXd prev_cell = t > 0
                                         ? cache[static_cast<std::size_t>(t - 1)].cell.array().eval()
                                         : Eigen::ArrayXd::Zero(h).eval();

    d_pre.col(t).segment(0, h) = (dc * g * i * (1.0 - i)).matrix();
    d_pre.col(t).segment(h, h) = (dc * prev_cell * f * (1.0 - f)).matrix();
    d_pre.col(t).segment(2 * h, h) = (dc * i * (1.0 - g.square())).matrix();
    d_pre.col(t).segment(3 * h, h) = (dh.array() * tc * o * (1.0 - o)).matrix();

    dc_next = (dc * f).matrix();
    dh_next = p.recurrent_weights.transpose() * d_pre.col(t);
  }

  Gradients grads;
  grads.shape = shape;
  auto& gt = grads.tensors;
  gt.input_weights = d_pre * xs.transpose();
  gt.recurrent_weights = d_pre * hs_prev.transpose();
  gt.gate_biases = d_pre.rowwise().sum();
  gt.output_weights = d_logits * hs.transpose();
  gt.output_bias = d_logits.rowwise().sum();
  return grads;
}

}  // namespace

LstmTensors LstmTensors::zeros(const LstmShape& shape) {
  const Index h = idx(shape.hidden);
  const Index a = idx(shape.action_count);
  LstmTensors t;
  t.input_weights = MatrixXd::Zero(4 * h, idx(shape.input_dim()));
  t.recurrent_weights = MatrixXd::Zero(4 * h, h);
  t.gate_biases = VectorXd::Zero(4 * h);
  t.output_weights = MatrixXd::Zero(a, h);
  t.output_bias = VectorXd::Zero(a);
  return t;
}

bool LstmTensors::all_finite() const {
  bool finite = true;
  for_each([&](const auto& m) { finite = finite && m.allFinite(); });
  return finite;
}

bool LstmTensors::same_shape(const LstmTensors& other) const {
  return input_weights.rows() == other.input_weights.rows() &&
         input_weights.cols() == other.input_weights.cols() &&
         recurrent_weights.rows() == other.recurrent_weights.rows() &&
         recurrent_weights.cols() == other.recurrent_weights.cols() &&
         gate_biases.size() == other.gate_biases.size() &&
         output_weights.rows() == other.output_weights.rows() &&
         output_weights.cols() == other.output_weights.cols() &&
         output_bias.size() == other.output_bias.size();
}

double Gradients::squared_norm() const {
  double total = 0.0;
  tensors.for_each([&](const auto& m) { total += m.squaredNorm(); });
  return total;
}

Gradients& Gradients::operator*=(double factor) {
  tensors.for_each([&](auto& m) { m *= factor; });
  return *this;
}

LstmParameters init_parameters(std::size_t obs_size, std::size_t action_count,
                               std::size_t hidden, std::uint64_t seed) {
  if (obs_size == 0 || action_count == 0 || hidden == 0)
    throw DimensionError(fmt::format("all dimensions must be >= 1 (obs {}, actions {}, hidden {})",
                                     obs_size, action_count, hidden));
  LstmParameters params{{obs_size, action_count, hidden}, {}};
  params.tensors = LstmTensors::zeros(params.shape);
  std::mt19937_64 rng(seed);
  auto& t = params.tensors;
  for (std::size_t g = 0; g < kGateCount; ++g) glorot_fill(t.gate_input_weights(Gate(g)), rng);
  for (std::size_t g = 0; g < kGateCount; ++g)
    glorot_fill(t.gate_recurrent_weights(Gate(g)), rng);
  glorot_fill(t.output_weights, rng);
  t.gate_bias(Gate::forget).setOnes();
  return params;
}

void validate(const LstmParameters& params) {
  const auto expected = LstmTensors::zeros(params.shape);
  if (!params.tensors.same_shape(expected))
    throw DimensionError("parameter tensors do not match the declared shape");
  if (!params.tensors.all_finite()) throw DataError("parameters contain non-finite values");
}

VectorXd build_input(const LstmShape& shape, const VectorXd& observation,
                     std::optional<ActionId> previous_action, const ActionMask& mask) {
  if (static_cast<std::size_t>(observation.size()) != shape.obs_size)
    throw DimensionError(fmt::format("observation has length {}, expected {}",
                                     observation.size(), shape.obs_size));
  if (mask.size() != shape.action_count)
    throw DimensionError(fmt::format("mask has length {}, expected {}", mask.size(),
                                     shape.action_count));
  const Index obs = idx(shape.obs_size);
  const Index a = idx(shape.action_count);
  VectorXd x = VectorXd::Zero(idx(shape.input_dim()));
  x.head(obs) = observation;
  if (previous_action) {
    if (*previous_action >= shape.action_count)
      throw DimensionError(fmt::format("previous action {} out of range", *previous_action));
    x(obs + idx(*previous_action)) = 1.0;
  }
  for (Index k = 0; k < a; ++k)
    if (mask.test(static_cast<std::size_t>(k))) x(obs + a + k) = 1.0;
  return x;
}

LstmState lstm_step(const LstmParameters& params, const LstmState& state, const VectorXd& x) {
  if (static_cast<std::size_t>(x.size()) != params.shape.input_dim())
    throw DimensionError(
        fmt::format("input has length {}, expected {}", x.size(), params.shape.input_dim()));
  if (static_cast<std::size_t>(state.hidden.size()) != params.shape.hidden ||
      static_cast<std::size_t>(state.cell.size()) != params.shape.hidden)
    throw DimensionError("state size does not match hidden size");
  if (!x.allFinite()) throw DataError("non-finite LSTM input");
  return step_with_gates(params, state, x).state;
}

VectorXd output_softmax(const LstmParameters& params, const VectorXd& hidden) {
  VectorXd logits = params.tensors.output_weights * hidden + params.tensors.output_bias;
  const double top = logits.maxCoeff();
  VectorXd e = (logits.array() - top).exp().matrix();
  return e / e.sum();
}

ActionDistribution output_distribution(const LstmParameters& params, const VectorXd& hidden,
                                       const ActionMask& mask) {
  if (mask.size() != params.shape.action_count)
    throw DimensionError(fmt::format("mask has length {}, expected {}", mask.size(),
                                     params.shape.action_count));
  if (mask.none()) throw DataError("action mask has no permitted action");
  const VectorXd logits = params.tensors.output_weights * hidden + params.tensors.output_bias;
  // Renormalizing softmax·mask equals a softmax restricted to permitted logits.
  double top = -std::numeric_limits<double>::infinity();
  for (Index k = 0; k < logits.size(); ++k)
    if (mask.test(static_cast<std::size_t>(k))) top = std::max(top, logits(k));
  VectorXd probs = VectorXd::Zero(logits.size());
  double total = 0.0;
  for (Index k = 0; k < logits.size(); ++k) {
    if (!mask.test(static_cast<std::size_t>(k))) continue;
    probs(k) = std::exp(logits(k) - top);
    total += probs(k);
  }
  probs /= total;
  return {std::move(probs)};
}

std::vector<ActionDistribution> forward_dialog(const LstmParameters& params,
                                               std::span<const VectorXd> observations,
                                               std::span<const ActionMask> masks,
                                               std::span<const ActionId> action_history) {
  check_sequences(params.shape, observations, masks, action_history.size());
  std::vector<ActionDistribution> out;
  out.reserve(observations.size());
  LstmState state = LstmState::zeros(params.shape.hidden);
  for (std::size_t t = 0; t < observations.size(); ++t) {
    std::optional<ActionId> prev;
    if (t > 0) prev = action_history[t - 1];
    state = lstm_step(params, state, build_input(params.shape, observations[t], prev, masks[t]));
    out.push_back(output_distribution(params, state.hidden, masks[t]));
  }
  return out;
}

SupervisedResult supervised_gradients(const LstmParameters& params,
                                      std::span<const VectorXd> observations,
                                      std::span<const ActionMask> masks,
                                      std::span<const ActionId> labels) {
  check_sequences(params.shape, observations, masks, labels.size());
  for (std::size_t t = 0; t < labels.size(); ++t) {
    if (labels[t] >= params.shape.action_count)
      throw DataError(fmt::format("label {} at turn {} out of range", labels[t], t));
    if (!masks[t].test(labels[t]))
      throw DataError(fmt::format("label {} at turn {} is masked out", labels[t], t));
  }
  const auto cache = forward_cached(params, observations, masks, labels);
  double loss = 0.0;
  for (std::size_t t = 0; t < cache.size(); ++t)
    loss -= std::log(cache[t].probs(idx(labels[t])));
  const std::vector<double> ones(labels.size(), 1.0);
  return {backward(params, cache, labels, ones), loss};
}

Gradients reinforce_gradients(const LstmParameters& params,
                              std::span<const VectorXd> observations,
                              std::span<const ActionMask> masks,
                              std::span<const ActionId> actions,
                              std::span<const double> behavior_probs, double episode_return,
                              double baseline) {
  check_sequences(params.shape, observations, masks, actions.size());
  if (behavior_probs.size() != actions.size())
    throw DimensionError("behavior probabilities do not match the action sequence");
  for (std::size_t t = 0; t < actions.size(); ++t) {
    if (actions[t] >= params.shape.action_count)
      throw DataError(fmt::format("action {} at turn {} out of range", actions[t], t));
    if (!(behavior_probs[t] > 0.0))
      throw DataError(fmt::format("recorded action {} at turn {} had zero probability",
                                  actions[t], t));
  }
  const double advantage = episode_return - baseline;
  if (advantage == 0.0) return Gradients::zeros(params.shape);
  const auto cache = forward_cached(params, observations, masks, actions);
  for (std::size_t t = 0; t < cache.size(); ++t)
    if (!(cache[t].probs(idx(actions[t])) > 0.0))
      throw DataError(fmt::format("action {} at turn {} has zero probability under the policy",
                                  actions[t], t));
  // ∇ log q = −∇(cross-entropy), so the per-turn weight is −(G − b).
  const std::vector<double> weights(actions.size(), -advantage);
  return backward(params, cache, actions, weights);
}

double sequence_log_prob(const LstmParameters& params, std::span<const VectorXd> observations,
                         std::span<const ActionMask> masks, std::span<const ActionId> actions) {
  const auto dists = forward_dialog(params, observations, masks, actions);
  double total = 0.0;
  for (std::size_t t = 0; t < dists.size(); ++t) total += std::log(dists[t][actions[t]]);
  return total;
}

}  // namespace hcn::neural
