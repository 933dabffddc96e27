#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pig::pomdp {

using Belief = std::vector<double>;

// Finite constrained POMDP. Tables are flat and row-major:
//   transition   [s][a][s']
//   observation  [s'][a][z]   (z observed after taking a and landing in s')
//   reward       [s][a]
//   costs[i]     [s][a]
struct TabularCPOMDP {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    std::size_t num_observations = 0;
    std::vector<double> transition;
    std::vector<double> observation;
    std::vector<double> reward;
    std::vector<std::vector<double>> costs;
    std::vector<double> budgets;
    double gamma = 0.95;
    Belief initial_belief;

    double P(std::size_t s, std::size_t a, std::size_t next) const {
        return transition[(s * num_actions + a) * num_states + next];
    }
    double O(std::size_t next, std::size_t a, std::size_t z) const {
        return observation[(next * num_actions + a) * num_observations + z];
    }
    double R(std::size_t s, std::size_t a) const { return reward[s * num_actions + a]; }
    double C(std::size_t i, std::size_t s, std::size_t a) const { return costs[i][s * num_actions + a]; }

    // Channel 0 is the reward, channel i+1 is cost i.
    std::size_t num_channels() const { return 1 + costs.size(); }
    std::span<const double> channel(std::size_t index) const;
    std::string channel_name(std::size_t index) const;

    // Throws std::invalid_argument describing the first broken invariant.
    void validate(double tolerance = 1e-12) const;
};

class ImpossibleObservation : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

void validate_belief(std::span<const double> b, std::size_t num_states, double tolerance = 1e-12);

// Pr(z | b, a)
double observation_probability(const TabularCPOMDP& model, std::span<const double> b, std::size_t a, std::size_t z);

// Bayes filter; throws ImpossibleObservation when Pr(z | b, a) == 0.
Belief belief_update(const TabularCPOMDP& model, std::span<const double> b, std::size_t a, std::size_t z);

// Same transitions and payoffs with an observation channel that reveals s'.
TabularCPOMDP make_fully_observable(const TabularCPOMDP& model);

// Same transitions and payoffs with a single uninformative observation.
TabularCPOMDP make_blind(const TabularCPOMDP& model);

} // namespace pig::pomdp
