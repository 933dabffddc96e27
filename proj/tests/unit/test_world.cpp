#include <doctest.h>

#include <cmath>
#include <vector>

#include "pig/env/gridworld.hpp"
#include "pig/env/replay.hpp"
#include "pig/world/world_model.hpp"

using namespace pig;
using namespace pig::world;
using grad::CategoricalDistribution;
using grad::Tensor;

namespace {

WorldModelConfig tiny(Ablation ablation = Ablation::Full) {
    WorldModelConfig c;
    c.obs_dim = env::GridWorldConfig{}.observation_dim();
    c.priv_dim = env::GridWorldConfig{}.privileged_dim();
    c.num_actions = env::kNumActions;
    c.deter = 24;
    c.groups = 4;
    c.classes = 4;
    c.embed = 16;
    c.hidden = 24;
    c.ablation = ablation;
    return c;
}

env::Transition to_transition(const env::StepResult& r, int prev_action, bool first) {
    return {r.observation, r.privileged, prev_action, r.reward, r.cost, first, r.terminal};
}

env::ReplayBuffer collect_random(std::size_t steps, std::uint64_t seed) {
    env::GridWorldConfig gc;
    gc.starts.clear(); // every free cell
    env::GridWorld world(gc);
    env::ReplayBuffer buf(steps, gc.observation_dim(), gc.privileged_dim(), env::kNumActions);
    Rng rng(seed);
    std::uint64_t episode = 0;
    auto r = world.reset(seed * 1000 + episode);
    buf.add(to_transition(r, -1, true));
    while (buf.size() < steps) {
        const int a = static_cast<int>(rng.index(env::kNumActions));
        auto s = world.step(a);
        buf.add(to_transition(s, a, false));
        if (s.done() && buf.size() < steps) {
            r = world.reset(seed * 1000 + ++episode);
            buf.add(to_transition(r, -1, true));
        }
    }
    return buf;
}

env::SequenceBatch fixed_batch(std::size_t B, std::size_t T, std::uint64_t seed) {
    auto buf = collect_random(400, seed);
    Rng rng(seed + 7);
    return *buf.sample(B, T, rng);
}

double closed_form_kl(const std::vector<double>& lq, const std::vector<double>& lp, std::size_t groups,
                      std::size_t classes) {
    double kl = 0.0;
    for (std::size_t g = 0; g < groups; ++g) {
        double zq = 0.0, zp = 0.0;
        for (std::size_t k = 0; k < classes; ++k) {
            zq += std::exp(lq[g * classes + k]);
            zp += std::exp(lp[g * classes + k]);
        }
        for (std::size_t k = 0; k < classes; ++k) {
            const double q = std::exp(lq[g * classes + k]) / zq;
            const double p = std::exp(lp[g * classes + k]) / zp;
            kl += q * std::log(q / p);
        }
    }
    return kl;
}

Tensor random_logits(std::size_t rows, std::size_t cols, Rng& rng, bool requires_grad) {
    std::vector<double> v(rows * cols);
    for (auto& x : v) x = rng.normal();
    return Tensor::from({rows, cols}, v, requires_grad);
}

bool all_zero(std::span<const double> g) {
    for (double x : g)
        if (x != 0.0) return false;
    return true;
}

} // namespace

TEST_CASE("encoder: finite, deterministic, configured width") {
    WorldModel wm(tiny(), 1);
    const auto& c = wm.config();
    Tensor zero = Tensor::zeros({1, c.obs_dim});
    Tensor e1 = wm.encode_observation(zero);
    Tensor e2 = wm.encode_observation(zero);
    CHECK(e1.cols() == c.embed);
    for (std::size_t i = 0; i < e1.numel(); ++i) {
        CHECK(std::isfinite(e1.values()[i]));
        CHECK(e1.values()[i] == e2.values()[i]);
    }
    CHECK(wm.encode_privileged(Tensor::zeros({1, c.priv_dim})).cols() == c.embed);
    CHECK_THROWS(wm.encode_observation(Tensor::zeros({1, c.obs_dim + 1})));
}

TEST_CASE("dynamics: deterministic under seed, shapes preserved") {
    WorldModel wm(tiny(), 2);
    const auto& c = wm.config();
    Latent s = wm.naive_initial(3);
    Tensor a = Tensor::zeros({3, c.num_actions});
    for (std::size_t b = 0; b < 3; ++b) a.mutable_values()[b * c.num_actions + b] = 1.0;
    Rng r1(5), r2(5);
    Latent n1 = wm.naive_imagine(s, a, r1);
    Latent n2 = wm.naive_imagine(s, a, r2);
    CHECK(n1.deter.cols() == c.deter);
    CHECK(n1.stoch.cols() == c.groups * c.classes);
    CHECK(n1.features().cols() == c.feature_dim());
    for (std::size_t i = 0; i < n1.stoch.numel(); ++i) CHECK(n1.stoch.values()[i] == n2.stoch.values()[i]);
    for (std::size_t i = 0; i < n1.deter.numel(); ++i) CHECK(n1.deter.values()[i] == n2.deter.values()[i]);
    // each group is exactly one-hot
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t g = 0; g < c.groups; ++g) {
            double s_g = 0.0;
            for (std::size_t k = 0; k < c.classes; ++k) s_g += n1.stoch.at(r, g * c.classes + k);
            CHECK(s_g == 1.0);
        }
    Latent n3 = wm.naive_imagine(n1, a, r1);
    CHECK(n3.deter.cols() == c.deter);
}

TEST_CASE("oracle posterior reduces to the naive posterior when z+ is tied off") {
    WorldModel wm(tiny(), 3);
    const auto& c = wm.config();
    auto& naive = wm.naive_posterior_head().layers();
    auto& oracle = wm.oracle_head().layers();
    REQUIRE(naive.size() == oracle.size());
    // first layer: rows [h, z-] copied, rows for z+ zeroed
    {
        auto wn = naive[0].weight().values();
        auto wo = oracle[0].weight().mutable_values();
        const std::size_t out = naive[0].out(), in_naive = naive[0].in();
        for (std::size_t i = 0; i < oracle[0].in(); ++i)
            for (std::size_t j = 0; j < out; ++j) wo[i * out + j] = i < in_naive ? wn[i * out + j] : 0.0;
        std::copy(naive[0].bias().values().begin(), naive[0].bias().values().end(),
                  oracle[0].bias().mutable_values().begin());
    }
    for (std::size_t l = 1; l < naive.size(); ++l) {
        std::copy(naive[l].weight().values().begin(), naive[l].weight().values().end(),
                  oracle[l].weight().mutable_values().begin());
        std::copy(naive[l].bias().values().begin(), naive[l].bias().values().end(),
                  oracle[l].bias().mutable_values().begin());
    }
    Rng rng(9);
    Tensor h = random_logits(4, c.deter, rng, false);
    Tensor em = random_logits(4, c.embed, rng, false);
    Tensor ep = random_logits(4, c.embed, rng, false);
    Tensor a = wm.naive_posterior_logits(h, em);
    Tensor b = wm.oracle_logits(h, em, ep);
    for (std::size_t i = 0; i < a.numel(); ++i) CHECK(a.values()[i] == doctest::Approx(b.values()[i]).epsilon(1e-12));
}

TEST_CASE("posterior: probabilities normalized, gradient reaches the encoder") {
    WorldModel wm(tiny(), 4);
    const auto& c = wm.config();
    auto batch = fixed_batch(2, 1, 4);
    Tensor obs = Tensor::from({2, c.obs_dim}, batch.observation);
    Tensor h = wm.naive_initial(2).deter;
    CategoricalDistribution d(wm.naive_posterior_logits(h, wm.encode_observation(obs)), c.groups, c.classes);
    Tensor p = d.probs();
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t g = 0; g < c.groups; ++g) {
            double s = 0.0;
            for (std::size_t k = 0; k < c.classes; ++k) s += p.at(r, g * c.classes + k);
            CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
        }

    // Analytic gradient of a smooth functional of the posterior against a
    // central difference on one encoder weight.
    Rng rng(11);
    Tensor w = random_logits(2, c.stoch(), rng, false);
    Tensor enc_w = wm.params().entries().front().second;
    REQUIRE(wm.params().entries().front().first.rfind("enc_obs", 0) == 0);
    auto loss_fn = [&] {
        CategoricalDistribution q(wm.naive_posterior_logits(h, wm.encode_observation(obs)), c.groups, c.classes);
        return grad::sum(q.probs() * w);
    };
    wm.params().zero_grad();
    grad::backward(loss_fn());
    std::size_t idx = 0;
    for (std::size_t i = 0; i < enc_w.numel(); ++i)
        if (std::abs(enc_w.grad()[i]) > std::abs(enc_w.grad()[idx])) idx = i;
    const double analytic = enc_w.grad()[idx];
    CHECK(analytic != 0.0);
    const double eps = 1e-5, orig = enc_w.values()[idx];
    enc_w.mutable_values()[idx] = orig + eps;
    const double up = loss_fn().item();
    enc_w.mutable_values()[idx] = orig - eps;
    const double down = loss_fn().item();
    enc_w.mutable_values()[idx] = orig;
    CHECK(analytic == doctest::Approx((up - down) / (2 * eps)).epsilon(1e-4));

    // straight-through sample carries gradient to the encoder too
    wm.params().zero_grad();
    Tensor s = grad::straight_through_onehot(wm.naive_posterior_logits(h, wm.encode_observation(obs)), c.groups, rng);
    grad::backward(grad::sum(s * w));
    CHECK_FALSE(all_zero(enc_w.grad()));
}

TEST_CASE("rep_loss: zero at q = p, closed form, stop-gradient placement") {
    Rng rng(21);
    const std::size_t G = 3, K = 4;
    Tensor lq = random_logits(1, G * K, rng, true);
    Tensor lp = random_logits(1, G * K, rng, true);
    CategoricalDistribution q(lq, G, K), p(lp, G, K);

    CHECK(rep_loss(q, q, 0.1, 0.5).item() == doctest::Approx(0.0).epsilon(1e-14));
    const std::vector<double> vq(lq.values().begin(), lq.values().end());
    const std::vector<double> vp(lp.values().begin(), lp.values().end());
    const double kl = closed_form_kl(vq, vp, G, K);
    CHECK(rep_loss(q, p, 1.0, 0.0).item() == doctest::Approx(kl).epsilon(1e-12));
    CHECK(rep_loss(q, p, 0.1, 0.5).item() == doctest::Approx(0.6 * kl).epsilon(1e-12));

    lq.zero_grad();
    lp.zero_grad();
    grad::backward(rep_loss(q, p, 1.0, 0.0));
    CHECK_FALSE(all_zero(lq.grad()));
    CHECK(all_zero(lp.grad()));

    lq.zero_grad();
    lp.zero_grad();
    grad::backward(rep_loss(q, p, 0.0, 1.0));
    CHECK(all_zero(lq.grad()));
    CHECK_FALSE(all_zero(lp.grad()));

    // free bits clamp each group from below
    const double clamped = rep_loss(q, q, 1.0, 0.0, 1.0).item();
    CHECK(clamped == doctest::Approx(double(G)));
}

TEST_CASE("rep_loss is nonnegative on random pairs") {
    Rng rng(22);
    for (int trial = 0; trial < 200; ++trial) {
        CategoricalDistribution q(random_logits(3, 12, rng, false), 4, 3), p(random_logits(3, 12, rng, false), 4, 3);
        CHECK(rep_loss(q, p, 0.1, 0.5).item() >= 0.0);
    }
}

TEST_CASE("alignment gradient: oracle head sees only the alpha path, naive posterior only beta") {
    Rng rng(23);
    const std::size_t G = 2, K = 3;
    Tensor star = random_logits(2, G * K, rng, true);
    Tensor minus = random_logits(2, G * K, rng, true);
    CategoricalDistribution q(star, G, K), p(minus, G, K);
    // alpha = 0: oracle logits get nothing
    grad::backward(rep_loss(q, p, 0.0, 0.5));
    CHECK(all_zero(star.grad()));
    CHECK_FALSE(all_zero(minus.grad()));
    star.zero_grad();
    minus.zero_grad();
    // beta = 0: naive logits get nothing
    grad::backward(rep_loss(q, p, 0.1, 0.0));
    CHECK_FALSE(all_zero(star.grad()));
    CHECK(all_zero(minus.grad()));
}

TEST_CASE("train step: align flag removes only L_align") {
    auto batch = fixed_batch(3, 6, 30);
    WorldModel full(tiny(Ablation::Full), 30), plain(tiny(Ablation::NoAlign), 30);
    Rng r1(1), r2(1);
    auto a = full.unroll(batch, r1).losses;
    auto b = plain.unroll(batch, r2).losses;
    CHECK(a.align > 0.0);
    CHECK(b.align == 0.0);
    CHECK(a.dyn == b.dyn);
    CHECK(a.dec == b.dec);
    CHECK(a.pred == b.pred);
    CHECK(a.kl_star_minus == b.kl_star_minus);
    CHECK(a.total == doctest::Approx(a.dyn + a.align + a.dec + a.pred).epsilon(1e-12));
    CHECK(b.total == doctest::Approx(b.dyn + b.dec + b.pred).epsilon(1e-12));
}

TEST_CASE("train step at the default learning rate decreases the loss on a frozen batch") {
    auto batch = fixed_batch(4, 8, 31);
    for (auto ablation : {Ablation::Full, Ablation::NoAlign, Ablation::Unprivileged, Ablation::Informed}) {
        auto cfg = tiny(ablation);
        CHECK(cfg.optimizer.learning_rate == 1e-4);
        WorldModel wm(cfg, 31);
        Rng r0(3);
        const double before = wm.unroll(batch, r0).losses.total;
        Rng r1(3);
        auto [losses, rollout] = wm.train_step(batch, r1);
        CHECK(losses.applied);
        CHECK(losses.total == doctest::Approx(before));
        Rng r2(3);
        const double after = wm.unroll(batch, r2).losses.total;
        INFO(to_string(ablation));
        CHECK(after < before);
    }
}

TEST_CASE("losses stay finite on degenerate observations") {
    for (double fill : {0.0, 1.0}) {
        auto batch = fixed_batch(2, 5, 32);
        for (auto& o : batch.observation) o = fill;
        for (auto& i : batch.privileged) i = fill;
        for (auto ablation : {Ablation::Full, Ablation::Unprivileged, Ablation::Informed}) {
            WorldModel wm(tiny(ablation), 32);
            Rng rng(1);
            auto [l, r] = wm.train_step(batch, rng);
            CHECK(std::isfinite(l.total));
            CHECK(l.dyn >= 0.0);
            CHECK(l.align >= 0.0);
        }
    }
}

TEST_CASE("rollout_posterior: lengths, determinism, no update, informative z+") {
    auto batch = fixed_batch(3, 7, 33);
    WorldModel wm(tiny(), 33);
    const auto before = wm.params().entries().front().second.clone_detached();
    Rng r1(4), r2(4);
    auto a = wm.rollout_posterior(batch, r1);
    auto b = wm.rollout_posterior(batch, r2);
    CHECK(a.length == 7);
    CHECK(a.minus.rows() == 21);
    CHECK(a.plus.rows() == 21);
    CHECK(a.star.rows() == 21);
    for (std::size_t i = 0; i < a.star.stoch.numel(); ++i) CHECK(a.star.stoch.values()[i] == b.star.stoch.values()[i]);
    const auto after = wm.params().entries().front().second;
    for (std::size_t i = 0; i < before.numel(); ++i) CHECK(before.values()[i] == after.values()[i]);
    Rng r3(4);
    CHECK(wm.unroll(batch, r3).losses.kl_star_minus > 1e-3);
}

TEST_CASE("reset flags re-initialize the latent state") {
    auto batch = fixed_batch(2, 6, 34);
    for (auto& f : batch.is_first) f = 0.0;
    batch.is_first[3 * 2 + 1] = 1.0; // t = 3, row 1
    WorldModel wm(tiny(), 34);
    Rng rng(2);
    auto r = wm.rollout_posterior(batch, rng);
    // h after a reset depends only on the learned initial state
    for (std::size_t j = 0; j < wm.config().deter; ++j) {
        CHECK(r.minus.deter.at(3 * 2 + 1, j) == doctest::Approx(r.minus.deter.at(0, j)).epsilon(1e-12));
        CHECK(r.plus.deter.at(3 * 2 + 1, j) == doctest::Approx(r.plus.deter.at(0, j)).epsilon(1e-12));
    }
    bool differs = false;
    for (std::size_t j = 0; j < wm.config().deter; ++j) differs |= r.minus.deter.at(3 * 2, j) != r.minus.deter.at(0, j);
    CHECK(differs);
}

TEST_CASE("privileged access counters") {
    auto batch = fixed_batch(2, 4, 35);
    WorldModel plain(tiny(Ablation::Unprivileged), 35);
    Rng rng(1);
    plain.train_step(batch, rng);
    CHECK(plain.counters().total() == 0);
    CHECK_THROWS(plain.privileged_imagine(plain.naive_initial(1), Tensor::zeros({1, 5}), rng));

    WorldModel full(tiny(Ablation::Full), 35);
    full.train_step(batch, rng);
    CHECK(full.counters().privileged_inputs == 8);
    CHECK(full.counters().oracle_posterior == 8);
    CHECK(full.counters().privileged_model == 8);
    const auto before = full.counters().total();
    Latent s = full.naive_initial(1);
    full.observe_step(s, Tensor::zeros({1, 5}), Tensor::zeros({1, full.config().obs_dim}), rng, true);
    CHECK(full.counters().total() == before);
}

TEST_CASE("alignment halves KL[s* || s-] on a fixed dataset") {
    // The oracle sharpens under decoder pressure before alignment catches
    // up, so the ratio is only reached once reconstruction has converged.
    auto buf = collect_random(300, 40);
    Rng data_rng(41);
    std::vector<env::SequenceBatch> data;
    for (int i = 0; i < 4; ++i) data.push_back(*buf.sample(4, 8, data_rng));
    auto run = [&](Ablation ablation, int steps) {
        auto cfg = tiny(ablation);
        cfg.groups = 8;
        cfg.classes = 8;
        cfg.optimizer.learning_rate = 1e-3;
        WorldModel wm(cfg, 40);
        auto eval_kl = [&] {
            double s = 0.0;
            for (auto& b : data) {
                Rng r(99);
                s += wm.unroll(b, r).losses.kl_star_minus;
            }
            return s / static_cast<double>(data.size());
        };
        const double initial = eval_kl();
        Rng rng(42);
        for (int step = 0; step < steps; ++step) wm.train_step(data[step % data.size()], rng);
        return std::pair{initial, eval_kl()};
    };
    const auto [initial, aligned] = run(Ablation::Full, 10000);
    INFO("initial " << initial << " final " << aligned);
    CHECK(aligned < 0.5 * initial);
    const auto [initial_plain, unaligned] = run(Ablation::NoAlign, 2000);
    CHECK(initial_plain == initial);
    CHECK(unaligned > 2.0 * initial);
}

TEST_CASE("predictors fit a deterministic one-state environment") {
    auto cfg = tiny(Ablation::Full);
    cfg.optimizer.learning_rate = 1e-3;
    WorldModel wm(cfg, 50);
    env::SequenceBatch batch;
    batch.batch = 4;
    batch.length = 6;
    batch.obs_dim = cfg.obs_dim;
    batch.priv_dim = cfg.priv_dim;
    batch.num_actions = cfg.num_actions;
    const std::size_t N = 24;
    batch.observation.assign(N * cfg.obs_dim, 0.0);
    for (std::size_t i = 0; i < N; ++i) batch.observation[i * cfg.obs_dim + 3] = 1.0;
    batch.privileged.assign(N * cfg.priv_dim, 0.5);
    batch.prev_action.assign(N * cfg.num_actions, 0.0);
    for (std::size_t i = 0; i < N; ++i) batch.prev_action[i * cfg.num_actions + 4] = 1.0;
    batch.reward.assign(N, 0.7);
    batch.cost.assign(N, 0.3);
    batch.is_first.assign(N, 0.0);
    batch.is_terminal.assign(N, 0.0);
    Rng rng(51);
    WorldLosses last;
    for (int step = 0; step < 2000; ++step) last = wm.train_step(batch, rng).first;
    Rng r(52);
    auto l = wm.unroll(batch, r).losses;
    CHECK(l.reward_mae < 0.05);
    CHECK(l.cost_mae < 0.05);
}
