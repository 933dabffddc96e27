#include "expectimax.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace pig::testing {

double expectimax_value(const pomdp::TabularCPOMDP& m, std::span<const double> payoff, std::span<const double> b,
                        std::size_t horizon) {
    if (horizon == 0) return 0.0;
    const std::size_t S = m.num_states;
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> next(S);
    for (std::size_t a = 0; a < m.num_actions; ++a) {
        double value = 0.0;
        for (std::size_t s = 0; s < S; ++s) value += b[s] * payoff[s * m.num_actions + a];
        double future = 0.0;
        for (std::size_t z = 0; z < m.num_observations; ++z) {
            bool any = false;
            for (std::size_t sp = 0; sp < S; ++sp) {
                double reach = 0.0;
                for (std::size_t s = 0; s < S; ++s) reach += b[s] * m.P(s, a, sp);
                next[sp] = m.O(sp, a, z) * reach;
                any = any || next[sp] > 0.0;
            }
            if (any) future += expectimax_value(m, payoff, next, horizon - 1);
        }
        value += m.gamma * future;
        best = std::max(best, value);
    }
    return best;
}

} // namespace pig::testing
