#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "pig/env/gridworld.hpp"
#include "pig/policy/actor_critic.hpp"
#include "pig/policy/lagrange.hpp"
#include "pig/world/world_model.hpp"

namespace pig::train {

struct TrainingConfig {
    std::size_t total_env_steps = 30000;
    // Replayed steps per environment step; updates = steps * ratio / (B * T).
    double train_ratio = 64.0;
    std::size_t batch = 16;
    std::size_t length = 16;
    std::size_t prefill = 1000;  // uniform-random steps before the first update
    std::size_t replay_capacity = 200000;
    std::size_t eval_interval = 5000;
    std::size_t eval_episodes = 10;
    bool greedy_eval = false;
    std::uint64_t seed = 0;
    bool record_wall_time = true;
};

struct RunConfig {
    env::GridWorldConfig env;
    world::WorldModelConfig world;
    policy::ActorCriticConfig policy;
    policy::LagrangeConfig lagrange;
    TrainingConfig training;
    world::Ablation ablation = world::Ablation::Full;
    std::string name = "run";

    // Copies env-derived dimensions and budget into the model configs.
    void resolve();
    void validate() const; // throws ConfigError
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const RunConfig& config);
// Missing keys keep their defaults; unknown top-level sections are rejected.
RunConfig run_config_from_json(const nlohmann::json& j);
// A variant name, or an object of boolean flags of which at most one is set.
world::Ablation ablation_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

// FNV-1a of the canonical JSON dump of the resolved config.
std::uint64_t config_hash(const RunConfig& config);

} // namespace pig::train
