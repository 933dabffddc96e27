#pragma once

#include <span>
#include <vector>

#include "pig/grad/tensor.hpp"

namespace pig::policy {

// X_H = v_H and X_t = x_t + gamma * ((1 - lambda) v_{t+1} + lambda X_{t+1}).
// x_H is ignored. Throws std::invalid_argument on empty or mismatched input
// or on gamma, lambda outside [0, 1].
std::vector<double> td_lambda(std::span<const double> values, std::span<const double> signals, double gamma,
                              double lambda);

// Batched form over imagined rollouts. `values` holds v_0..v_H, `signals`
// and `discounts` hold x_t and the per-row discount for t = 0..H-1, all of
// shape [rows, 1]. Returns X_0..X_{H-1}; differentiable in every input.
std::vector<grad::Tensor> td_lambda(const std::vector<grad::Tensor>& values,
                                    const std::vector<grad::Tensor>& signals,
                                    const std::vector<grad::Tensor>& discounts, double lambda);

} // namespace pig::policy
