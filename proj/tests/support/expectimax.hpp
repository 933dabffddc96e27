#pragma once

#include <cstddef>
#include <span>

#include "pig/pomdp/model.hpp"

namespace pig::testing {

// Brute-force finite-horizon belief value by expanding every (a, z) branch.
// Works on unnormalized beliefs: the value is homogeneous of degree one, so
// branch weights Pr(z | b, a) never need dividing out.
double expectimax_value(const pomdp::TabularCPOMDP& model, std::span<const double> payoff,
                        std::span<const double> belief, std::size_t horizon);

} // namespace pig::testing
