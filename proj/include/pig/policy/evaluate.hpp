#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pig/env/gridworld.hpp"
#include "pig/policy/imagination.hpp"
#include "pig/world/world_model.hpp"

namespace pig::policy {

// Deployment-time filter and action selection. Uses only the naive model's
// observation posterior and the actor; both are taken by const reference.
class Agent {
public:
    Agent(const world::WorldModel& model, const Actor& actor);

    void reset();
    // Filters the observation reached by the previous action.
    void observe(const std::vector<double>& observation, Rng& rng, bool greedy);
    int choose(Rng& rng, bool greedy) const;
    void record_action(int action);
    // observe + choose + record. Greedy mode takes the posterior and policy modes.
    int act(const std::vector<double>& observation, Rng& rng, bool greedy);

    const Latent& latent() const { return latent_; }
    const Tensor& prev_action() const { return prev_action_; }
    void set_state(Latent latent, Tensor prev_action);

private:
    const world::WorldModel& model_;
    const Actor& actor_;
    Latent latent_;
    Tensor prev_action_;
};

struct EvalOptions {
    std::size_t episodes = 10;
    std::uint64_t seed = 0;
    bool greedy = false;
    bool keep_logs = false;
};

struct EvalResult {
    double mean_return = 0.0;
    double mean_cost = 0.0;
    std::vector<double> returns, costs;
    std::vector<std::size_t> lengths;
    std::vector<std::vector<env::EpisodeLogRow>> logs;
    world::AccessCounters access; // privileged reads during the evaluation
};

// Runs E episodes, each reset with mix_seed(seed, e); returns undiscounted
// reward and cost sums averaged over episodes.
EvalResult evaluate(const env::GridWorldConfig& env_config, const Actor& actor, const world::WorldModel& model,
                    const EvalOptions& options);

} // namespace pig::policy
