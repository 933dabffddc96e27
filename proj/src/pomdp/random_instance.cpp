#include "pig/pomdp/random_instance.hpp"

#include <stdexcept>

namespace pig::pomdp {

namespace {

std::size_t draw_between(Rng& rng, std::size_t lo, std::size_t hi) {
    if (lo > hi || lo == 0) throw std::invalid_argument("invalid size range");
    return lo + rng.index(hi - lo + 1);
}

} // namespace

TabularCPOMDP random_instance(Rng& rng, const RandomInstanceSpec& spec) {
    TabularCPOMDP m;
    m.num_states = draw_between(rng, spec.min_states, spec.max_states);
    m.num_actions = draw_between(rng, spec.min_actions, spec.max_actions);
    m.num_observations = draw_between(rng, spec.min_observations, spec.max_observations);
    const std::size_t S = m.num_states, A = m.num_actions, Z = m.num_observations;
    m.gamma = spec.gamma;
    for (std::size_t row = 0; row < S * A; ++row) {
        auto p = sample_simplex(rng, S);
        m.transition.insert(m.transition.end(), p.begin(), p.end());
    }
    for (std::size_t row = 0; row < S * A; ++row) {
        auto o = sample_simplex(rng, Z);
        m.observation.insert(m.observation.end(), o.begin(), o.end());
    }
    m.reward.resize(S * A);
    for (double& r : m.reward) r = rng.uniform();
    for (std::size_t i = 0; i < spec.num_costs; ++i) {
        std::vector<double> c(S * A);
        for (double& v : c) v = rng.bernoulli(spec.cost_probability) ? 1.0 : 0.0;
        m.costs.push_back(std::move(c));
        m.budgets.push_back(rng.uniform(0.0, 2.0));
    }
    m.initial_belief = sample_simplex(rng, S);
    return m;
}

} // namespace pig::pomdp
