#include "pig/train/config.hpp"

#include <fstream>
#include <sstream>

#include "pig/util/hash.hpp"

namespace pig::train {

void RunConfig::resolve() {
    world.obs_dim = env.observation_dim();
    world.priv_dim = env.privileged_dim();
    world.num_actions = env::kNumActions;
    world.ablation = ablation;
    policy.budget = env.budget;
    policy.action_repeat = env.action_repeat;
    policy.episode_steps = env.max_steps;
}

void RunConfig::validate() const {
    try {
        env.validate();
    } catch (const env::ConfigError& e) {
        throw ConfigError(e.what());
    }
    const auto& t = training;
    if (t.batch == 0 || t.length == 0) throw ConfigError("batch and length must be >= 1");
    if (!(t.train_ratio > 0.0)) throw ConfigError("train_ratio must be > 0");
    if (t.eval_interval == 0) throw ConfigError("eval_interval must be >= 1");
    if (t.replay_capacity < t.length) throw ConfigError("replay_capacity must hold at least one sequence");
    if (!(lagrange.mu0 > 0.0)) throw ConfigError("mu0 must be > 0");
}

nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json env_j, world_j, policy_j, lagrange_j;
    env::to_json(env_j, c.env);
    world::to_json(world_j, c.world);
    policy::to_json(policy_j, c.policy);
    policy::to_json(lagrange_j, c.lagrange);
    const auto& t = c.training;
    return {{"name", c.name},
            {"ablation", world::to_string(c.ablation)},
            {"env", env_j},
            {"world", world_j},
            {"policy", policy_j},
            {"constraint", lagrange_j},
            {"training",
             {{"total_env_steps", t.total_env_steps},
              {"train_ratio", t.train_ratio},
              {"batch", t.batch},
              {"length", t.length},
              {"prefill", t.prefill},
              {"replay_capacity", t.replay_capacity},
              {"eval_interval", t.eval_interval},
              {"eval_episodes", t.eval_episodes},
              {"greedy_eval", t.greedy_eval},
              {"seed", t.seed},
              {"record_wall_time", t.record_wall_time}}}};
}

world::Ablation ablation_from_json(const nlohmann::json& j) {
    if (j.is_string()) return world::ablation_from_string(j.get<std::string>());
    if (!j.is_object()) throw ConfigError("ablation must be a name or an object of flags");
    world::Ablation chosen = world::Ablation::Full;
    int set = 0;
    for (const auto& [key, value] : j.items()) {
        const auto variant = world::ablation_from_string(key);
        if (variant == world::Ablation::Full) throw ConfigError("'full' is not an ablation flag");
        if (!value.is_boolean()) throw ConfigError("ablation flag '" + key + "' must be a boolean");
        if (value.get<bool>()) {
            chosen = variant;
            ++set;
        }
    }
    if (set > 1) throw ConfigError("conflicting ablation flags: at most one may be set");
    return chosen;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig c;
    try {
        if (!j.is_object()) throw ConfigError("config must be a JSON object");
        for (const auto& [key, value] : j.items()) {
            (void)value;
            static const char* known[] = {"name", "ablation", "env", "world", "policy", "constraint", "training"};
            bool ok = false;
            for (const char* k : known) ok = ok || key == k;
            if (!ok) throw ConfigError("unknown config section '" + key + "'");
        }
        const auto schema = to_json(RunConfig{});
        for (const char* section : {"env", "world", "policy", "constraint", "training"}) {
            if (!j.contains(section)) continue;
            if (!j.at(section).is_object()) throw ConfigError(std::string("section '") + section + "' must be an object");
            for (const auto& [key, value] : j.at(section).items()) {
                (void)value;
                if (!schema.at(section).contains(key))
                    throw ConfigError("unknown key '" + key + "' in section '" + section + "'");
            }
        }
        if (j.contains("name")) c.name = j.at("name").get<std::string>();
        if (j.contains("ablation")) c.ablation = ablation_from_json(j.at("ablation"));
        if (j.contains("env")) env::from_json(j.at("env"), c.env);
        if (j.contains("world")) world::from_json(j.at("world"), c.world);
        if (j.contains("policy")) policy::from_json(j.at("policy"), c.policy);
        if (j.contains("constraint")) policy::from_json(j.at("constraint"), c.lagrange);
        if (j.contains("training")) {
            const auto& t = j.at("training");
            auto get = [&](const char* key, auto& field) {
                if (t.contains(key)) t.at(key).get_to(field);
            };
            get("total_env_steps", c.training.total_env_steps);
            get("train_ratio", c.training.train_ratio);
            get("batch", c.training.batch);
            get("length", c.training.length);
            get("prefill", c.training.prefill);
            get("replay_capacity", c.training.replay_capacity);
            get("eval_interval", c.training.eval_interval);
            get("eval_episodes", c.training.eval_episodes);
            get("greedy_eval", c.training.greedy_eval);
            get("seed", c.training.seed);
            get("record_wall_time", c.training.record_wall_time);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    c.resolve();
    c.validate();
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return run_config_from_json(j);
}

std::uint64_t config_hash(const RunConfig& config) { return fnv1a64(to_json(config).dump()); }

} // namespace pig::train
