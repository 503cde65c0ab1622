#include "hcn/neural/optimizer.hpp"

#include <cmath>

#include "hcn/util/error.hpp"

namespace hcn::neural {
namespace {

// Applies f(param, grad, grad_sq, update_sq) over the five tensor slots.
template <class F>
void zip4(LstmTensors& p, const LstmTensors& g, LstmTensors& gs, LstmTensors& us, F&& f) {
  f(p.input_weights, g.input_weights, gs.input_weights, us.input_weights);
  f(p.recurrent_weights, g.recurrent_weights, gs.recurrent_weights, us.recurrent_weights);
  f(p.gate_biases, g.gate_biases, gs.gate_biases, us.gate_biases);
  f(p.output_weights, g.output_weights, gs.output_weights, us.output_weights);
  f(p.output_bias, g.output_bias, gs.output_bias, us.output_bias);
}

}  // namespace

AdaDeltaState AdaDeltaState::zeros(const LstmShape& shape, double rho, double epsilon) {
  if (!(rho > 0.0 && rho < 1.0)) throw UsageError("AdaDelta rho must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw UsageError("AdaDelta epsilon must be positive");
  return {LstmTensors::zeros(shape), LstmTensors::zeros(shape), rho, epsilon};
}

double global_norm(const Gradients& grads) { return std::sqrt(grads.squared_norm()); }

Gradients clip_global_norm(Gradients grads, double max_norm) {
  const double norm = global_norm(grads);
  if (norm > max_norm) grads *= max_norm / norm;
  return grads;
}

void adadelta_step(LstmParameters& params, const Gradients& grads, AdaDeltaState& state) {
  if (!(params.shape == grads.shape) || !params.tensors.same_shape(grads.tensors) ||
      !params.tensors.same_shape(state.grad_sq_avg) ||
      !params.tensors.same_shape(state.update_sq_avg))
    throw DimensionError("AdaDelta step on incongruent tensors");
  const double rho = state.rho;
  const double eps = state.epsilon;
  zip4(params.tensors, grads.tensors, state.grad_sq_avg, state.update_sq_avg,
       [&](auto& p, const auto& g, auto& gs, auto& us) {
         auto ga = g.array();
         gs.array() = rho * gs.array() + (1.0 - rho) * ga.square();
         const auto delta =
             (-(us.array() + eps).sqrt() / (gs.array() + eps).sqrt() * ga).eval();
         us.array() = rho * us.array() + (1.0 - rho) * delta.square();
         p.array() += delta;
       });
}

}  // namespace hcn::neural
