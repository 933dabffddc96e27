#include "pig/pomdp/mdp.hpp"

#include <algorithm>
#include <stdexcept>

namespace pig::pomdp {

StateValues value_iteration(const TabularCPOMDP& m, std::span<const double> payoff, std::size_t horizon) {
    const std::size_t S = m.num_states, A = m.num_actions;
    if (payoff.size() != S * A) throw std::invalid_argument("payoff table has wrong size");
    StateValues out;
    out.stages.assign(1, std::vector<double>(S, 0.0));
    for (std::size_t h = 1; h <= horizon; ++h) {
        const auto& prev = out.stages.back();
        std::vector<double> q(S * A);
        std::vector<double> v(S);
        for (std::size_t s = 0; s < S; ++s) {
            for (std::size_t a = 0; a < A; ++a) {
                double future = 0.0;
                for (std::size_t next = 0; next < S; ++next) future += m.P(s, a, next) * prev[next];
                q[s * A + a] = payoff[s * A + a] + m.gamma * future;
            }
            double best = q[s * A];
            for (std::size_t a = 1; a < A; ++a) best = std::max(best, q[s * A + a]);
            v[s] = best;
        }
        out.stages.push_back(std::move(v));
        out.q = std::move(q);
    }
    return out;
}

std::vector<StateValues> mdp_value_iteration(const TabularCPOMDP& m, std::size_t horizon) {
    std::vector<StateValues> out;
    for (std::size_t c = 0; c < m.num_channels(); ++c) out.push_back(value_iteration(m, m.channel(c), horizon));
    return out;
}

StateValues scalarized_value_iteration(const TabularCPOMDP& m, std::span<const double> multipliers,
                                       std::size_t horizon) {
    if (multipliers.size() != m.costs.size()) throw std::invalid_argument("one multiplier per cost is required");
    std::vector<double> payoff = m.reward;
    for (std::size_t i = 0; i < multipliers.size(); ++i) {
        if (!(multipliers[i] >= 0.0)) throw std::invalid_argument("multipliers must be nonnegative");
        for (std::size_t k = 0; k < payoff.size(); ++k) payoff[k] -= multipliers[i] * m.costs[i][k];
    }
    return value_iteration(m, payoff, horizon);
}

double asymmetric_belief_value(std::span<const double> v, std::span<const double> b) {
    if (v.size() != b.size()) throw std::invalid_argument("belief and value lengths differ");
    double total = 0.0;
    for (std::size_t s = 0; s < v.size(); ++s) total += b[s] * v[s];
    return total;
}

std::size_t greedy_action(const StateValues& values, std::size_t num_actions, std::size_t s) {
    if (values.q.empty()) throw std::invalid_argument("no Q table at horizon 0");
    std::size_t best = 0;
    for (std::size_t a = 1; a < num_actions; ++a)
        if (values.q[s * num_actions + a] > values.q[s * num_actions + best]) best = a;
    return best;
}

} // namespace pig::pomdp
