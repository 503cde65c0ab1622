#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hcn/neural/action_mask.hpp"

namespace hcn {

using ActionId = std::size_t;

namespace neural {

inline constexpr std::size_t kGateCount = 4;

/// Gate order used for every stacked tensor.
enum class Gate : std::size_t { input = 0, forget = 1, cell = 2, output = 3 };

struct LstmShape {
  std::size_t obs_size = 0;
  std::size_t action_count = 0;
  std::size_t hidden = 0;

  /// The recurrent layer sees obs ⊕ one-hot(previous action) ⊕ action mask.
  std::size_t input_dim() const { return obs_size + 2 * action_count; }

  friend bool operator==(const LstmShape&, const LstmShape&) = default;
};

/// All trainable tensors of the network. Gate tensors are stacked
/// [input; forget; cell; output] along the rows, so `input_weights` is
/// (4·hidden × input_dim) and `gate_input_weights(g)` is one hidden×input_dim
/// block.
struct LstmTensors {
  Eigen::MatrixXd input_weights;      // 4H × D
  Eigen::MatrixXd recurrent_weights;  // 4H × H
  Eigen::VectorXd gate_biases;        // 4H
  Eigen::MatrixXd output_weights;     // A × H
  Eigen::VectorXd output_bias;        // A

  static LstmTensors zeros(const LstmShape& shape);

  auto gate_input_weights(Gate g) {
    return input_weights.middleRows(gate_offset(g), hidden());
  }
  auto gate_input_weights(Gate g) const {
    return input_weights.middleRows(gate_offset(g), hidden());
  }
  auto gate_recurrent_weights(Gate g) {
    return recurrent_weights.middleRows(gate_offset(g), hidden());
  }
  auto gate_recurrent_weights(Gate g) const {
    return recurrent_weights.middleRows(gate_offset(g), hidden());
  }
  auto gate_bias(Gate g) { return gate_biases.segment(gate_offset(g), hidden()); }
  auto gate_bias(Gate g) const { return gate_biases.segment(gate_offset(g), hidden()); }

  /// Visits the five tensors in declaration order.
  template <class F>
  void for_each(F&& f) {
    f(input_weights);
    f(recurrent_weights);
    f(gate_biases);
    f(output_weights);
    f(output_bias);
  }
  template <class F>
  void for_each(F&& f) const {
    f(input_weights);
    f(recurrent_weights);
    f(gate_biases);
    f(output_weights);
    f(output_bias);
  }

  bool all_finite() const;
  bool same_shape(const LstmTensors& other) const;

 private:
  Eigen::Index hidden() const { return recurrent_weights.cols(); }
  Eigen::Index gate_offset(Gate g) const {
    return static_cast<Eigen::Index>(g) * hidden();
  }
};

/// Visits matching tensors of two tensor sets pairwise.
template <class F>
void zip_tensors(LstmTensors& a, const LstmTensors& b, F&& f) {
  f(a.input_weights, b.input_weights);
  f(a.recurrent_weights, b.recurrent_weights);
  f(a.gate_biases, b.gate_biases);
  f(a.output_weights, b.output_weights);
  f(a.output_bias, b.output_bias);
}

struct LstmParameters {
  LstmShape shape;
  LstmTensors tensors;
};

/// Same layout as the parameters they update.
struct Gradients {
  LstmShape shape;
  LstmTensors tensors;

  static Gradients zeros(const LstmShape& shape) { return {shape, LstmTensors::zeros(shape)}; }

  double squared_norm() const;
  Gradients& operator*=(double factor);
};

struct LstmState {
  Eigen::VectorXd hidden;
  Eigen::VectorXd cell;

  static LstmState zeros(std::size_t hidden) {
    return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hidden)),
            Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hidden))};
  }
};

struct ActionDistribution {
  Eigen::VectorXd probs;

  std::size_t size() const { return static_cast<std::size_t>(probs.size()); }
  double operator[](std::size_t i) const { return probs(static_cast<Eigen::Index>(i)); }
};

/// Glorot-uniform weights, zero biases except forget-gate bias 1.
/// Deterministic for a fixed seed.
LstmParameters init_parameters(std::size_t obs_size, std::size_t action_count,
                               std::size_t hidden, std::uint64_t seed);

/// Checks shapes and finiteness; throws DimensionError / DataError.
void validate(const LstmParameters& params);

/// obs ⊕ one-hot(previous action, zero vector when absent) ⊕ mask.
Eigen::VectorXd build_input(const LstmShape& shape, const Eigen::VectorXd& observation,
                            std::optional<ActionId> previous_action, const ActionMask& mask);

LstmState lstm_step(const LstmParameters& params, const LstmState& state,
                    const Eigen::VectorXd& x);

/// Unmasked softmax over the output layer.
Eigen::VectorXd output_softmax(const LstmParameters& params, const Eigen::VectorXd& hidden);

/// Softmax, multiplied by the mask, renormalized. Throws DataError when the
/// mask has no set bit.
ActionDistribution output_distribution(const LstmParameters& params,
                                       const Eigen::VectorXd& hidden, const ActionMask& mask);

/// Runs the network over one dialog from a zero state. `action_history[t]`
/// is fed as the previous action at turn t+1.
std::vector<ActionDistribution> forward_dialog(const LstmParameters& params,
                                               std::span<const Eigen::VectorXd> observations,
                                               std::span<const ActionMask> masks,
                                               std::span<const ActionId> action_history);

struct SupervisedResult {
  Gradients gradients;
  double loss = 0.0;
};

/// Summed cross-entropy over all turns and its full-BPTT gradient.
SupervisedResult supervised_gradients(const LstmParameters& params,
                                      std::span<const Eigen::VectorXd> observations,
                                      std::span<const ActionMask> masks,
                                      std::span<const ActionId> labels);

/// (G − b) · ∇ Σ_t log π(a_t | h_t). `behavior_probs` are the probabilities
/// recorded when the actions were sampled; any zero entry is an error.
Gradients reinforce_gradients(const LstmParameters& params,
                              std::span<const Eigen::VectorXd> observations,
                              std::span<const ActionMask> masks,
                              std::span<const ActionId> actions,
                              std::span<const double> behavior_probs, double episode_return,
                              double baseline);

/// Σ_t log π(a_t | h_t) under `params`, with the given actions as history.
double sequence_log_prob(const LstmParameters& params,
                         std::span<const Eigen::VectorXd> observations,
                         std::span<const ActionMask> masks, std::span<const ActionId> actions);

}  // namespace neural
}  // namespace hcn
