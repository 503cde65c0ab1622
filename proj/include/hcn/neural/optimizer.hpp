#pragma once

#include "hcn/neural/lstm.hpp"

namespace hcn::neural {

/// Running averages of squared gradients and squared updates, one slot per
/// parameter.
struct AdaDeltaState {
  LstmTensors grad_sq_avg;
  LstmTensors update_sq_avg;
  double rho = 0.95;
  double epsilon = 1e-6;

  static AdaDeltaState zeros(const LstmShape& shape, double rho = 0.95, double epsilon = 1e-6);
};

double global_norm(const Gradients& grads);

/// Rescales all entries by max_norm / n when the global L2 norm n exceeds
/// max_norm.
Gradients clip_global_norm(Gradients grads, double max_norm);

/// One descent step: E[g²] ← ρE[g²] + (1−ρ)g²; Δ = −√(E[Δ²]+ε)/√(E[g²]+ε)·g;
/// E[Δ²] ← ρE[Δ²] + (1−ρ)Δ²; param += Δ.
void adadelta_step(LstmParameters& params, const Gradients& grads, AdaDeltaState& state);

}  // namespace hcn::neural
