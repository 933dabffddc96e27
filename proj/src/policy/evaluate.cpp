#include "pig/policy/evaluate.hpp"

#include "pig/grad/ops.hpp"

namespace pig::policy {

Agent::Agent(const world::WorldModel& model, const Actor& actor) : model_(model), actor_(actor) { reset(); }

void Agent::reset() {
    latent_ = model_.naive_initial(1);
    prev_action_ = Tensor::zeros({1, model_.config().num_actions});
}

void Agent::observe(const std::vector<double>& observation, Rng& rng, bool greedy) {
    const Tensor obs = Tensor::from({1, observation.size()}, observation);
    latent_ = model_.observe_step(latent_, prev_action_, obs, rng, greedy).detached();
}

int Agent::choose(Rng& rng, bool greedy) const {
    const auto dist = actor_.distribution(latent_);
    const Tensor choice = greedy ? dist.mode() : dist.sample(rng);
    int action = 0;
    for (std::size_t a = 0; a < choice.numel(); ++a)
        if (choice.values()[a] > 0.5) action = static_cast<int>(a);
    return action;
}

void Agent::record_action(int action) {
    prev_action_ = Tensor::zeros({1, model_.config().num_actions});
    prev_action_.mutable_values()[static_cast<std::size_t>(action)] = 1.0;
}

int Agent::act(const std::vector<double>& observation, Rng& rng, bool greedy) {
    observe(observation, rng, greedy);
    const int action = choose(rng, greedy);
    record_action(action);
    return action;
}

void Agent::set_state(Latent latent, Tensor prev_action) {
    latent_ = std::move(latent);
    prev_action_ = std::move(prev_action);
}

EvalResult evaluate(const env::GridWorldConfig& env_config, const Actor& actor, const world::WorldModel& model,
                    const EvalOptions& options) {
    const world::AccessCounters before = model.counters();
    EvalResult result;
    env::GridWorld env(env_config);
    Agent agent(model, actor);
    Rng rng(mix_seed(options.seed, 0xe7a1));
    for (std::size_t e = 0; e < options.episodes; ++e) {
        env.set_logging(options.keep_logs);
        auto step = env.reset(mix_seed(options.seed, e));
        agent.reset();
        double ret = 0.0, cost = 0.0;
        std::size_t length = 0;
        while (!step.done()) {
            const int a = agent.act(step.observation, rng, options.greedy);
            step = env.step(a);
            ret += step.reward;
            cost += step.cost;
            ++length;
        }
        result.returns.push_back(ret);
        result.costs.push_back(cost);
        result.lengths.push_back(length);
        if (options.keep_logs) result.logs.push_back(env.log());
    }
    for (std::size_t e = 0; e < options.episodes; ++e) {
        result.mean_return += result.returns[e];
        result.mean_cost += result.costs[e];
    }
    if (options.episodes) {
        result.mean_return /= static_cast<double>(options.episodes);
        result.mean_cost /= static_cast<double>(options.episodes);
    }
    const auto& after = model.counters();
    result.access.privileged_inputs = after.privileged_inputs - before.privileged_inputs;
    result.access.privileged_model = after.privileged_model - before.privileged_model;
    result.access.oracle_posterior = after.oracle_posterior - before.oracle_posterior;
    result.access.privileged_critic = after.privileged_critic - before.privileged_critic;
    return result;
}

} // namespace pig::policy
