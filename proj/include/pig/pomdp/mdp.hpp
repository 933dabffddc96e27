#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pig/pomdp/model.hpp"

namespace pig::pomdp {

// Finite-horizon state values. stages[h][s] is the optimal value with h steps
// to go, so stages[0] is all zeros and stages.back() is the full horizon.
struct StateValues {
    std::vector<std::vector<double>> stages;
    std::vector<double> q; // [s][a] at the full horizon; empty when horizon is 0

    const std::vector<double>& top() const { return stages.back(); }
};

// Max-backup value iteration on an arbitrary per-step payoff table [s][a].
StateValues value_iteration(const TabularCPOMDP& model, std::span<const double> payoff, std::size_t horizon);

// One StateValues per channel: reward first, then each cost under the same max-backup.
std::vector<StateValues> mdp_value_iteration(const TabularCPOMDP& model, std::size_t horizon);

// Value iteration on R - sum_i lambda_i C_i. Budget offsets are left to the caller.
StateValues scalarized_value_iteration(const TabularCPOMDP& model, std::span<const double> multipliers,
                                       std::size_t horizon);

// sum_s b(s) V(s)
double asymmetric_belief_value(std::span<const double> state_values, std::span<const double> b);

// Greedy action of the full-horizon Q table at state s (lowest index on ties).
std::size_t greedy_action(const StateValues& values, std::size_t num_actions, std::size_t s);

} // namespace pig::pomdp
