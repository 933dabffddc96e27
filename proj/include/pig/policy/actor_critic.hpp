#pragma once

#include <cstddef>
#include <cstdint>

#include <json.hpp>

#include "pig/grad/nn.hpp"
#include "pig/grad/optim.hpp"
#include "pig/policy/imagination.hpp"
#include "pig/policy/lagrange.hpp"
#include "pig/world/world_model.hpp"

namespace pig::policy {

enum class ActorGradient { Dynamics, Reinforce };

struct ActorCriticConfig {
    std::size_t hidden = 128;
    std::size_t horizon = 15;
    double gamma = 0.997;
    double lambda_r = 0.95;
    double lambda_c = 0.95;
    double entropy = 3e-4;
    bool entropy_literal_sign = false; // minimize +eta*H as printed instead of a bonus
    double ema = 0.005;
    double slow_reg = 1.0; // weight of the pull towards the slow critic
    ActorGradient gradient = ActorGradient::Dynamics;
    grad::AdamConfig actor_optimizer{3e-5, 0.9, 0.999, 1e-5, 100.0};
    grad::AdamConfig critic_optimizer{3e-5, 0.9, 0.999, 1e-5, 100.0};
    // Budget per imagined step sequence: b * horizon * action_repeat / T_ep.
    double budget = 2.0;
    std::size_t action_repeat = 1;
    std::size_t episode_steps = 200;
    // Number of imagination starts per update; 0 uses every posterior state.
    std::size_t starts = 0;

    double horizon_budget() const {
        return budget * static_cast<double>(horizon * action_repeat) / static_cast<double>(episode_steps);
    }
};

void to_json(nlohmann::json& j, const ActorCriticConfig& c);
void from_json(const nlohmann::json& j, ActorCriticConfig& c);

// Scalar value head with a slow EMA copy.
class Critic {
public:
    Critic() = default;
    Critic(std::size_t input_dim, std::size_t hidden, std::uint64_t seed, const std::string& name);

    Tensor value(const Tensor& input) const { return net_(input); }
    Tensor slow_value(const Tensor& input) const { return slow_net_(input); }
    void update_slow(double rate) { slow_params_.blend_towards(params_, rate); }

    grad::ParameterSet& params() { return params_; }
    const grad::ParameterSet& params() const { return params_; }
    grad::ParameterSet& slow_params() { return slow_params_; }
    const grad::ParameterSet& slow_params() const { return slow_params_; }

private:
    grad::ParameterSet params_, slow_params_;
    grad::Mlp net_, slow_net_;
};

struct PolicyReport {
    double actor_loss = 0.0;
    double critic_r_loss = 0.0;
    double critic_c_loss = 0.0;
    double entropy = 0.0;
    double mean_return = 0.0; // mean R^lambda
    double mean_cost = 0.0;   // mean C^lambda
    double delta = 0.0;       // mean C^lambda - horizon budget
    double penalty = 0.0;
    bool actor_applied = false;
    bool critic_applied = false;
};

class ActorCritic {
public:
    ActorCritic(const ActorCriticConfig& config, const world::WorldModel& model, std::uint64_t seed);

    const ActorCriticConfig& config() const { return config_; }
    Actor& actor() { return actor_; }
    const Actor& actor() const { return actor_; }
    Critic& reward_critic() { return reward_critic_; }
    Critic& cost_critic() { return cost_critic_; }
    const Critic& reward_critic() const { return reward_critic_; }
    const Critic& cost_critic() const { return cost_critic_; }
    grad::Adam& actor_optimizer() { return actor_opt_; }
    grad::Adam& reward_optimizer() { return reward_opt_; }
    grad::Adam& cost_optimizer() { return cost_opt_; }
    bool privileged_critics() const { return privileged_; }

    // Critic input for one time slice: concat(s-, s+) or s- alone.
    Tensor critic_input(const Latent& minus, const Latent& plus, world::AccessCounters& counters) const;

    // Imagine from the given starts, update actor and critics, then the
    // multiplier (skipped when `delta_override` supplies a measured value
    // and the config asks for it). `lagrange` may be null for an
    // unconstrained update.
    PolicyReport update(world::WorldModel& model, const Latent& start_minus, const Latent& start_plus,
                        Lagrange* lagrange, Rng& rng, const double* delta_override = nullptr);

    // Actor and critic steps on an existing trajectory.
    PolicyReport learn(const ImaginedTrajectory& traj, world::AccessCounters& counters, Lagrange* lagrange);

    // Critic regression on detached inputs and targets; exposed for tests.
    double critic_step(Critic& critic, grad::Adam& optimizer, const Tensor& inputs, const Tensor& targets,
                       const Tensor& weights, bool& applied);

private:
    ActorCriticConfig config_;
    bool privileged_ = false;
    Actor actor_;
    Critic reward_critic_, cost_critic_;
    grad::Adam actor_opt_, reward_opt_, cost_opt_;
};

} // namespace pig::policy
