#include "policy_oracles.hpp"

#include <cmath>

#include "pig/grad/ops.hpp"
#include "pig/pomdp/mdp.hpp"

namespace pig::testing {

std::vector<double> td_lambda_brute_force(std::span<const double> v, std::span<const double> x, double gamma,
                                          double lambda) {
    const std::size_t H = v.size();
    std::vector<double> X(H);
    for (std::size_t t = 0; t < H; ++t) {
        const std::size_t m = H - 1 - t;
        auto n_step = [&](std::size_t n) {
            double g = 0.0, disc = 1.0;
            for (std::size_t k = 0; k < n; ++k) {
                g += disc * x[t + k];
                disc *= gamma;
            }
            return g + disc * v[t + n];
        };
        double total = 0.0;
        for (std::size_t n = 1; n < m; ++n) total += (1.0 - lambda) * std::pow(lambda, double(n - 1)) * n_step(n);
        const double tail = m == 0 ? 1.0 : std::pow(lambda, double(m - 1));
        total += tail * n_step(m);
        X[t] = total;
    }
    return X;
}

namespace {

pomdp::TabularCPOMDP bandit_model() {
    pomdp::TabularCPOMDP m;
    m.num_states = 1;
    m.num_actions = 2;
    m.num_observations = 1;
    m.transition = {1.0, 1.0};
    m.observation = {1.0, 1.0};
    m.reward = {1.0, 0.5};
    m.costs = {{1.0, 0.0}};
    m.budgets = {0.0};
    m.initial_belief = {1.0};
    return m;
}

} // namespace

double bandit_lambda_star() {
    const auto model = bandit_model();
    auto safe_optimal = [&](double lambda) {
        const double mult[] = {lambda};
        const auto v = pomdp::scalarized_value_iteration(model, mult, 1);
        return pomdp::greedy_action(v, 2, 0) == 1;
    };
    double lo = 0.0, hi = 10.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (safe_optimal(mid) ? hi : lo) = mid;
    }
    return hi;
}

BanditResult run_constrained_bandit(const BanditOptions& o) {
    world::WorldModelConfig wc;
    wc.obs_dim = 1;
    wc.priv_dim = 1;
    wc.num_actions = 2;
    wc.deter = 8;
    wc.groups = 2;
    wc.classes = 2;
    wc.embed = 4;
    wc.hidden = 8;
    wc.ablation = world::Ablation::Unprivileged;
    world::WorldModel model(wc, o.seed);

    policy::ActorCriticConfig ac;
    ac.hidden = 16;
    ac.horizon = 1;
    ac.budget = o.budget;
    ac.episode_steps = 1;
    ac.gradient = o.gradient;
    ac.actor_optimizer.learning_rate = o.actor_lr;
    policy::ActorCritic agent(ac, model, o.seed);

    policy::LagrangeConfig lc;
    lc.mode = o.mode;
    lc.lambda0 = o.lambda0;
    lc.mu0 = o.mu0;
    lc.nu = o.nu;
    policy::Lagrange lagrange(lc);

    using grad::Tensor;
    const Tensor reward_table = Tensor::from({2, 1}, {1.0, 0.5});
    const Tensor cost_table = Tensor::from({2, 1}, {1.0, 0.0});
    const world::Latent state = model.naive_initial(o.rows);
    world::AccessCounters counters;
    Rng rng(o.seed);

    BanditResult result;
    result.lambda_star = bandit_lambda_star();
    result.first_converged = o.updates + 1;
    auto safe_prob = [&] { return agent.actor().distribution(state.detached()).probs().at(0, 1); };
    for (std::size_t k = 0; k < o.updates; ++k) {
        policy::ImaginedTrajectory traj;
        traj.horizon = 1;
        traj.rows = o.rows;
        traj.minus = {state, state};
        const auto dist = agent.actor().distribution(state);
        const Tensor a = dist.sample(rng);
        traj.actions = {a};
        traj.log_probs = {dist.log_prob(grad::stop_gradient(a))};
        traj.entropies = {dist.entropy()};
        traj.rewards = {grad::matmul(a, reward_table)};
        traj.costs = {grad::matmul(a, cost_table)};
        traj.continues = {Tensor::zeros({o.rows, 1})};
        const auto report = agent.learn(traj, counters, &lagrange);
        lagrange.update(report.delta);
        if (result.first_converged > o.updates && safe_prob() > 0.95) result.first_converged = k + 1;
    }
    result.safe_probability = safe_prob();
    result.final_lambda = lagrange.multiplier();
    return result;
}

} // namespace pig::testing
