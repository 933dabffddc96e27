#include "pig/policy/actor_critic.hpp"

#include <cmath>
#include <stdexcept>

#include "pig/grad/ops.hpp"
#include "pig/policy/td_lambda.hpp"

namespace pig::policy {

using namespace grad;

void to_json(nlohmann::json& j, const ActorCriticConfig& c) {
    j = {{"hidden", c.hidden},
         {"horizon", c.horizon},
         {"gamma", c.gamma},
         {"lambda_r", c.lambda_r},
         {"lambda_c", c.lambda_c},
         {"entropy", c.entropy},
         {"entropy_literal_sign", c.entropy_literal_sign},
         {"ema", c.ema},
         {"slow_reg", c.slow_reg},
         {"gradient", c.gradient == ActorGradient::Dynamics ? "dynamics" : "reinforce"},
         {"actor_lr", c.actor_optimizer.learning_rate},
         {"critic_lr", c.critic_optimizer.learning_rate},
         {"starts", c.starts}};
}

void from_json(const nlohmann::json& j, ActorCriticConfig& c) {
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) j.at(key).get_to(field);
    };
    get("hidden", c.hidden);
    get("horizon", c.horizon);
    get("gamma", c.gamma);
    get("lambda_r", c.lambda_r);
    get("lambda_c", c.lambda_c);
    get("entropy", c.entropy);
    get("entropy_literal_sign", c.entropy_literal_sign);
    get("ema", c.ema);
    get("slow_reg", c.slow_reg);
    get("actor_lr", c.actor_optimizer.learning_rate);
    get("critic_lr", c.critic_optimizer.learning_rate);
    get("starts", c.starts);
    if (j.contains("gradient")) {
        const auto g = j.at("gradient").get<std::string>();
        if (g == "dynamics") c.gradient = ActorGradient::Dynamics;
        else if (g == "reinforce") c.gradient = ActorGradient::Reinforce;
        else throw std::invalid_argument("gradient must be dynamics or reinforce");
    }
    if (c.horizon == 0 || c.hidden == 0) throw std::invalid_argument("horizon and hidden must be >= 1");
    if (c.gamma < 0 || c.gamma > 1 || c.lambda_r < 0 || c.lambda_r > 1 || c.lambda_c < 0 || c.lambda_c > 1)
        throw std::invalid_argument("gamma and lambdas must lie in [0, 1]");
    if (c.ema < 0 || c.ema > 1) throw std::invalid_argument("ema must lie in [0, 1]");
}

Critic::Critic(std::size_t input_dim, std::size_t hidden, std::uint64_t seed, const std::string& name) {
    Rng rng(seed);
    net_ = Mlp(input_dim, {hidden, hidden}, 1, rng, params_, name, Activation::Elu, Activation::None, 0.0);
    Rng copy(seed);
    slow_net_ = Mlp(input_dim, {hidden, hidden}, 1, copy, slow_params_, name, Activation::Elu, Activation::None, 0.0);
    slow_params_.set_requires_grad(false);
}

ActorCritic::ActorCritic(const ActorCriticConfig& config, const world::WorldModel& model, std::uint64_t seed)
    : config_(config), privileged_(model.config().privileged_model()) {
    const std::size_t feat = model.config().feature_dim();
    const std::size_t critic_in = privileged_ ? 2 * feat : feat;
    actor_ = Actor(feat, model.config().num_actions, config_.hidden, mix_seed(seed, 1));
    reward_critic_ = Critic(critic_in, config_.hidden, mix_seed(seed, 2), "critic_r");
    cost_critic_ = Critic(critic_in, config_.hidden, mix_seed(seed, 3), "critic_c");
    actor_opt_ = Adam(actor_.params().tensors(), config_.actor_optimizer);
    reward_opt_ = Adam(reward_critic_.params().tensors(), config_.critic_optimizer);
    cost_opt_ = Adam(cost_critic_.params().tensors(), config_.critic_optimizer);
}

Tensor ActorCritic::critic_input(const Latent& minus, const Latent& plus, world::AccessCounters& counters) const {
    if (!privileged_) return minus.features();
    counters.privileged_critic += minus.rows();
    return concat({minus.features(), plus.features()});
}

double ActorCritic::critic_step(Critic& critic, Adam& optimizer, const Tensor& inputs, const Tensor& targets,
                                const Tensor& weights, bool& applied) {
    const Tensor v = critic.value(inputs);
    Tensor loss = 0.5 * mean(weights * square(v - targets));
    if (config_.slow_reg > 0.0)
        loss = loss + config_.slow_reg * 0.5 * mean(weights * square(v - stop_gradient(critic.slow_value(inputs))));
    const double value = loss.item();
    optimizer.zero_grad();
    applied = false;
    if (std::isfinite(value)) {
        backward(loss);
        applied = optimizer.step().applied;
    }
    if (applied) critic.update_slow(config_.ema);
    return value;
}

PolicyReport ActorCritic::learn(const ImaginedTrajectory& traj, world::AccessCounters& counters, Lagrange* lagrange) {
    const std::size_t H = traj.horizon, N = traj.rows;
    PolicyReport report;

    std::vector<Tensor> inputs;
    for (std::size_t t = 0; t <= H; ++t)
        inputs.push_back(critic_input(traj.minus[t], privileged_ ? traj.plus[t] : Latent{}, counters));

    reward_critic_.params().set_requires_grad(false);
    cost_critic_.params().set_requires_grad(false);
    std::vector<Tensor> v_r, v_c, discounts, weights;
    for (std::size_t t = 0; t <= H; ++t) {
        v_r.push_back(reward_critic_.value(inputs[t]));
        v_c.push_back(cost_critic_.value(inputs[t]));
    }
    Tensor w = Tensor::full({N, 1}, 1.0);
    for (std::size_t t = 0; t < H; ++t) {
        discounts.push_back(config_.gamma * traj.continues[t]);
        weights.push_back(w);
        w = (w * traj.continues[t]).clone_detached();
    }
    const auto R = td_lambda(v_r, traj.rewards, discounts, config_.lambda_r);
    const auto C = td_lambda(v_c, traj.costs, discounts, config_.lambda_c);

    double sum_r = 0.0, sum_c = 0.0, sum_h = 0.0;
    for (std::size_t t = 0; t < H; ++t) {
        sum_r += mean(R[t]).item();
        sum_c += mean(C[t]).item();
        sum_h += mean(traj.entropies[t]).item();
    }
    report.mean_return = sum_r / static_cast<double>(H);
    report.mean_cost = sum_c / static_cast<double>(H);
    report.entropy = sum_h / static_cast<double>(H);
    report.delta = report.mean_cost - config_.horizon_budget();
    const double slope = lagrange ? lagrange->slope(report.delta) : 0.0;
    report.penalty = lagrange ? lagrange->penalty(report.delta) : 0.0;

    const double eta = config_.entropy_literal_sign ? -config_.entropy : config_.entropy;
    std::vector<Tensor> terms;
    for (std::size_t t = 0; t < H; ++t) {
        Tensor objective;
        if (config_.gradient == ActorGradient::Dynamics) {
            objective = slope != 0.0 ? R[t] - slope * C[t] : R[t];
        } else {
            const Tensor adv = stop_gradient((R[t] - v_r[t]) - slope * (C[t] - v_c[t]));
            objective = adv * traj.log_probs[t];
        }
        terms.push_back(weights[t] * (objective + eta * traj.entropies[t]));
    }
    const Tensor actor_loss = -1.0 * mean(concat_rows(terms));
    report.actor_loss = actor_loss.item();
    actor_opt_.zero_grad();
    if (std::isfinite(report.actor_loss)) {
        backward(actor_loss);
        report.actor_applied = actor_opt_.step().applied;
    }
    reward_critic_.params().set_requires_grad(true);
    cost_critic_.params().set_requires_grad(true);

    std::vector<Tensor> x, tr, tc, wt;
    for (std::size_t t = 0; t < H; ++t) {
        x.push_back(inputs[t].clone_detached());
        tr.push_back(R[t].clone_detached());
        tc.push_back(C[t].clone_detached());
        wt.push_back(weights[t]);
    }
    const Tensor X = concat_rows(x), W = concat_rows(wt);
    bool ok_r = false, ok_c = false;
    report.critic_r_loss = critic_step(reward_critic_, reward_opt_, X, concat_rows(tr), W, ok_r);
    report.critic_c_loss = critic_step(cost_critic_, cost_opt_, X, concat_rows(tc), W, ok_c);
    report.critic_applied = ok_r && ok_c;
    return report;
}

PolicyReport ActorCritic::update(world::WorldModel& model, const Latent& start_minus, const Latent& start_plus,
                                 Lagrange* lagrange, Rng& rng, const double* delta_override) {
    PolicyReport report;
    {
        const auto traj = twisted_imagination(model, actor_, start_minus, start_plus, config_.horizon, rng);
        report = learn(traj, model.counters(), lagrange);
    }
    if (lagrange) lagrange->update(delta_override ? *delta_override : report.delta);
    return report;
}

} // namespace pig::policy
