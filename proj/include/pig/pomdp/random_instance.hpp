#pragma once

#include <cstddef>

#include "pig/pomdp/model.hpp"
#include "pig/util/rng.hpp"

namespace pig::pomdp {

struct RandomInstanceSpec {
    std::size_t min_states = 2, max_states = 5;
    std::size_t min_actions = 2, max_actions = 3;
    std::size_t min_observations = 2, max_observations = 3;
    std::size_t num_costs = 1;
    double cost_probability = 0.3; // chance that C[s][a] = 1
    double gamma = 0.95;
};

// Dirichlet(1) rows for P and O, rewards uniform in [0, 1], 0/1 costs.
TabularCPOMDP random_instance(Rng& rng, const RandomInstanceSpec& spec = {});

} // namespace pig::pomdp
