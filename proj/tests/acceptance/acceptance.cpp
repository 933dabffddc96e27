// Acceptance checks. `acceptance --criterion N` prints one PASS/FAIL line for
// criterion N (plus INFO lines) and exits nonzero on FAIL.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "gradcheck.hpp"
#include "pig/grad/ops.hpp"
#include "pig/policy/lagrange.hpp"
#include "pig/policy/td_lambda.hpp"
#include "pig/train/checkpoint.hpp"
#include "pig/train/config.hpp"
#include "pig/train/trainer.hpp"
#include "pig/train/verify.hpp"
#include "pig/util/csv.hpp"
#include "policy_oracles.hpp"

using namespace pig;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) { return csv::format_double(v); }

void info(const std::string& line) { std::cout << "INFO " << line << "\n"; }

bool verdict(int criterion, bool pass, const std::string& summary) {
    std::cout << "criterion " << criterion << ": " << (pass ? "PASS" : "FAIL") << " " << summary << std::endl;
    return pass;
}

// ---------------------------------------------------------------- 1
bool theorem1() {
    const auto t0 = Clock::now();
    train::VerifyOptions o; // 100 instances, 1000 beliefs, horizon <= 6
    const auto r = train::verify_theorem1_suite(o);
    const double elapsed = seconds_since(t0);
    const bool has_cost = r.csv.find(",cost") != std::string::npos;
    for (const auto& n : r.notes) info(n);
    info("skipped instances " + std::to_string(r.skipped) + ", runtime " + num(elapsed) + " s");
    return verdict(1, r.violations == 0 && r.skipped == 0 && has_cost && r.checked >= 200 && elapsed < 600.0,
                   "violations=" + std::to_string(r.violations) + " rows=" + std::to_string(r.checked) +
                       " tol=1e-9 runtime=" + num(elapsed) + "s (<600s)");
}

// ---------------------------------------------------------------- 2
bool lemma2() {
    train::VerifyOptions o;
    const auto r = train::verify_lemma2(o);
    for (const auto& n : r.notes) info(n);
    // The literal statement (zero margin at every belief) is checked for
    // information only; it is false at interior beliefs.
    std::size_t literal_fail = 0;
    {
        const auto rows = csv::parse(r.csv);
        for (const auto& row : rows)
            if (row.size() > 9 && row[0] == "fully_observable" && std::stod(row[9]) > 1e-9) ++literal_fail;
    }
    info("literal 'V_asym - V_sym = 0 at every belief' on fully observable instances: " +
         std::string(literal_fail ? "fails" : "holds") + " on " + std::to_string(literal_fail) +
         " channel rows at interior beliefs (vertices and the closed form max_a b.Q are the checked statements)");
    return verdict(2, r.violations == 0 && r.checked > 0,
                   "stages+channels checked=" + std::to_string(r.checked) + " mismatches=" +
                       std::to_string(r.violations) + " (exact counts, margins within 1e-9)");
}

// ---------------------------------------------------------------- 3
bool gradients() {
    std::size_t fd_fail = 0, sg_fail = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        const auto g = testing::RandomGraph::generate(seed);
        const auto leaves = g.make_leaves(seed + 7919);
        const auto res = testing::check_gradients([&](const std::vector<grad::Tensor>& l) { return g.build(l); },
                                                  leaves, 1e-4, 1e-4);
        worst = std::max(worst, res.worst_rel);
        if (!res.ok) {
            ++fd_fail;
            info("graph " + std::to_string(seed) + ": " + res.worst_where);
        }

        // Routing the first leaf through stop_gradient must leave its gradient
        // exactly zero and the forward value unchanged.
        auto fresh = g.make_leaves(seed + 7919);
        std::vector<grad::Tensor> routed = fresh;
        routed[0] = grad::stop_gradient(fresh[0]);
        const auto y = g.build(routed);
        const auto y_ref = g.build(g.make_leaves(seed + 7919));
        if (y.requires_grad()) grad::backward(y);
        bool ok = y.item() == y_ref.item();
        for (double v : fresh[0].grad()) ok = ok && v == 0.0;
        if (!ok) ++sg_fail;
    }
    info("worst relative error over checked entries " + num(worst));
    return verdict(3, fd_fail == 0 && sg_fail == 0,
                   "graphs=500 fd_failures=" + std::to_string(fd_fail) + " (rel<1e-4) stop_gradient_failures=" +
                       std::to_string(sg_fail) + " (exact)");
}

// ---------------------------------------------------------------- 4
bool td() {
    Rng rng(2024);
    double worst = 0.0, worst_closed = 0.0;
    std::size_t cases = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t H = 1 + rng.index(8);
        std::vector<double> v(H + 1), x(H + 1);
        for (auto& e : v) e = rng.uniform(-3, 3);
        for (auto& e : x) e = rng.uniform(-3, 3);
        const double gamma = rng.uniform();
        for (double lambda : {rng.uniform(), 0.0, 1.0}) {
            const auto a = policy::td_lambda(v, x, gamma, lambda);
            const auto b = testing::td_lambda_brute_force(v, x, gamma, lambda);
            for (std::size_t t = 0; t <= H; ++t) worst = std::max(worst, std::abs(a[t] - b[t]));
            for (std::size_t t = 0; t < H; ++t) {
                double closed = 0.0;
                if (lambda == 0.0) {
                    closed = x[t] + gamma * v[t + 1];
                } else if (lambda == 1.0) {
                    double disc = 1.0;
                    for (std::size_t k = t; k < H; ++k, disc *= gamma) closed += disc * x[k];
                    closed += disc * v[H];
                } else {
                    continue;
                }
                worst_closed = std::max(worst_closed, std::abs(a[t] - closed));
            }
            ++cases;
        }
    }
    return verdict(4, worst <= 1e-10 && worst_closed <= 1e-10,
                   "cases=" + std::to_string(cases) + " max|td-brute|=" + num(worst) +
                       " max|td-closed(lambda in {0,1})|=" + num(worst_closed) + " (tol 1e-10)");
}

// ---------------------------------------------------------------- 5
bool lagrangian() {
    Rng rng(77);
    double worst = 0.0;
    std::size_t upper = 0, lower = 0;
    for (int i = 0; i < 100000; ++i) {
        const double lambda = rng.uniform(0, 5), mu = rng.uniform(1e-4, 5), delta = rng.uniform(-5, 5);
        const auto s = policy::augmented_lagrangian(delta, lambda, mu);
        double psi, next;
        if (lambda + mu * delta >= 0.0) {
            psi = lambda * delta + mu / 2.0 * delta * delta;
            next = lambda + mu * delta;
            ++upper;
        } else {
            psi = -lambda * lambda / (2.0 * mu);
            next = 0.0;
            ++lower;
        }
        worst = std::max({worst, std::abs(s.psi - psi) / std::max(1.0, std::abs(psi)),
                          std::abs(s.next_lambda - next) / std::max(1.0, std::abs(next))});
    }
    const double machine = 4.0 * std::numeric_limits<double>::epsilon();

    double jump = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double lambda = rng.uniform(0.01, 5), mu = rng.uniform(1e-3, 5);
        const double boundary = -lambda / mu, expected = -lambda * lambda / (2 * mu);
        for (double d : {boundary, std::nextafter(boundary, -1e9), std::nextafter(boundary, 1e9)})
            jump = std::max(jump, std::abs(policy::augmented_lagrangian(d, lambda, mu).psi - expected) /
                                      std::max(1.0, std::abs(expected)));
    }

    std::size_t negative = 0, not_increasing = 0;
    for (int seq = 0; seq < 100000; ++seq) {
        policy::LagrangeConfig c;
        c.lambda0 = rng.uniform(0, 2);
        c.mu0 = rng.uniform(1e-6, 2);
        c.nu = rng.uniform(0, 1e-3);
        policy::Lagrange l(c);
        for (int k = 0; k < 10; ++k) {
            const double before = l.multiplier(), delta = rng.uniform(-3, 3);
            l.update(delta);
            if (l.multiplier() < 0.0) ++negative;
            if (delta > 0.0 && !(l.multiplier() > before)) ++not_increasing;
        }
    }
    return verdict(5, worst <= machine && jump <= 1e-9 && negative == 0 && not_increasing == 0,
                   "branch evaluations upper=" + std::to_string(upper) + " lower=" + std::to_string(lower) +
                       " max rel err=" + num(worst) + " (<=4 eps) boundary jump=" + num(jump) +
                       " negative lambda=" + std::to_string(negative) + "/1e6 updates over 1e5 sequences");
}

// ---------------------------------------------------------------- 6
bool bandit() {
    const auto t0 = Clock::now();
    const double lambda_star = testing::bandit_lambda_star();
    bool pass = std::abs(lambda_star - 0.5) < 1e-9;
    std::ostringstream summary;
    summary << "lambda*=" << num(lambda_star);
    for (auto gradient : {policy::ActorGradient::Dynamics, policy::ActorGradient::Reinforce}) {
        testing::BanditOptions o;
        o.gradient = gradient;
        const auto r = testing::run_constrained_bandit(o);
        const bool ok = r.safe_probability > 0.95 && r.first_converged <= 3000 && r.final_lambda > lambda_star;
        pass = pass && ok;
        summary << (gradient == policy::ActorGradient::Dynamics ? " dynamics:" : " reinforce:")
                << " pi(safe)=" << num(r.safe_probability) << " lambda=" << num(r.final_lambda)
                << " converged_at=" << r.first_converged;
    }
    const double elapsed = seconds_since(t0);
    summary << " runtime=" << num(elapsed) << "s (<120s)";
    return verdict(6, pass && elapsed < 120.0, summary.str());
}

// ---------------------------------------------------------------- 7-9
train::RunConfig smoke_config() { return train::load_run_config(PIG_SOURCE_DIR "/configs/smoke.json"); }

struct SmokeRun {
    double J = 0.0, J_c = 0.0, kl_initial = 0.0, kl_first = 0.0, kl_final = 0.0, seconds = 0.0;
    std::uint64_t eval_access = 0;
};

SmokeRun smoke_run(train::RunConfig c, world::Ablation ablation, std::uint64_t seed, const std::string& out) {
    c.ablation = ablation;
    c.training.seed = seed;
    c.resolve();
    const auto t0 = Clock::now();
    train::Trainer t(c);
    train::run_training(t, out, false);
    SmokeRun r;
    r.seconds = seconds_since(t0);
    const auto& rows = t.rows();
    r.J = rows.back().J;
    r.J_c = rows.back().J_c;
    r.kl_initial = t.initial_kl();
    for (const auto& row : rows)
        if (row.updates > 0) {
            r.kl_first = row.kl_star_minus;
            break;
        }
    r.kl_final = rows.back().kl_star_minus;
    r.eval_access = t.eval_access().total();
    return r;
}

bool smoke(std::size_t seeds, std::size_t steps) {
    auto c = smoke_config();
    if (steps) c.training.total_env_steps = steps;
    const auto root = std::filesystem::path(train::output_root()) / "acceptance_c7";
    double full_J = 0, full_Jc = 0, unpriv_J = 0, worst_seconds = 0;
    std::size_t kl_ok = 0;
    std::uint64_t access = 0;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
        for (auto ab : {world::Ablation::Full, world::Ablation::Unprivileged}) {
            const auto name = world::to_string(ab) + "-s" + std::to_string(seed);
            const auto r = smoke_run(c, ab, seed, (root / name).string());
            worst_seconds = std::max(worst_seconds, r.seconds);
            access += r.eval_access;
            info(name + " J=" + num(r.J) + " J_c=" + num(r.J_c) + " kl(init)=" + num(r.kl_initial) +
                 " kl(first row)=" + num(r.kl_first) + " kl(final)=" + num(r.kl_final) + " time=" + num(r.seconds) +
                 "s");
            if (ab == world::Ablation::Full) {
                full_J += r.J;
                full_Jc += r.J_c;
                if (r.kl_final < 0.5 * r.kl_first) ++kl_ok;
            } else {
                unpriv_J += r.J;
            }
        }
    }
    const double n = static_cast<double>(seeds);
    full_J /= n;
    full_Jc /= n;
    unpriv_J /= n;
    const double budget = c.env.budget;
    const bool a = full_Jc <= budget + 0.5;
    const bool b = full_J >= unpriv_J;
    const bool kl = kl_ok == seeds;
    info("7a mean final J_c (full) " + num(full_Jc) + " <= " + num(budget + 0.5) + ": " + (a ? "yes" : "no"));
    info("7b mean final J full " + num(full_J) + " >= unprivileged " + num(unpriv_J) + ": " + (b ? "yes" : "no"));
    info("7c final KL < 0.5 x first-row KL on " + std::to_string(kl_ok) + "/" + std::to_string(seeds) +
         " full seeds: " + (kl ? "yes" : "no"));
    return verdict(7, a && b && kl && worst_seconds < 3600.0 && access == 0,
                   "seeds=" + std::to_string(seeds) + " steps=" + std::to_string(c.training.total_env_steps) +
                       " 7a=" + (a ? "ok" : "fail") + " 7b=" + (b ? "ok" : "fail") + " 7c=" + (kl ? "ok" : "fail") +
                       " slowest run " + num(worst_seconds) + "s (<3600s)");
}

bool purity() {
    auto c = smoke_config();
    c.training.total_env_steps = 8000;
    c.training.eval_interval = 2000;
    std::uint64_t eval_access = 0, train_access = 0, evals = 0;
    for (auto ab : {world::Ablation::Full, world::Ablation::NoAlign, world::Ablation::Unprivileged,
                    world::Ablation::Informed}) {
        c.ablation = ab;
        c.resolve();
        train::Trainer t(c);
        t.run();
        eval_access += t.eval_access().total();
        train_access += t.train_access().total();
        evals += t.rows().size() * c.training.eval_episodes;
        // A standalone evaluation of the final parameters.
        policy::EvalOptions o;
        o.episodes = 10;
        o.seed = 99;
        const auto r = policy::evaluate(c.env, t.agent().actor(), t.world_model(), o);
        eval_access += r.access.total();
        evals += o.episodes;
    }
    info("privileged reads during training (instrument is live): " + std::to_string(train_access));
    return verdict(8, eval_access == 0 && train_access > 0,
                   "evaluation episodes=" + std::to_string(evals) + " privileged reads during evaluation=" +
                       std::to_string(eval_access));
}

bool persistence() {
    auto c = smoke_config();
    c.training.total_env_steps = 6000;
    c.training.eval_interval = 2000;
    c.training.record_wall_time = false;
    c.resolve();
    const auto root = std::filesystem::path(train::output_root()) / "acceptance_c9";
    train::Trainer a(c), b(c);
    train::run_training(a, (root / "a").string(), false);
    train::run_training(b, (root / "b").string(), false);
    auto slurp = [](const std::filesystem::path& p) { return train::read_file(p.string()); };
    const bool metrics_same = slurp(root / "a" / "metrics.csv") == slurp(root / "b" / "metrics.csv");
    const bool ckpt_same = slurp(root / "a" / "checkpoint.bin") == slurp(root / "b" / "checkpoint.bin");

    train::Trainer part(c);
    part.run(4000);
    const std::size_t k = part.rows().size();
    const auto resumed = train::Trainer::from_checkpoint_bytes(part.checkpoint_bytes());
    resumed->run();
    const bool resume_same = resumed->rows().size() == a.rows().size() && resumed->rows()[k] == a.rows()[k];
    const bool resume_ckpt = resumed->checkpoint_bytes() == a.checkpoint_bytes();
    const std::string bytes = a.checkpoint_bytes();
    const bool roundtrip = train::Trainer::from_checkpoint_bytes(bytes)->checkpoint_bytes() == bytes;
    info("updates per run " + std::to_string(a.updates()) + ", resumed at env_step " +
         std::to_string(part.env_step()));
    return verdict(9, metrics_same && ckpt_same && resume_same && resume_ckpt && roundtrip,
                   std::string("metrics identical=") + (metrics_same ? "yes" : "no") +
                       " checkpoints identical=" + (ckpt_same ? "yes" : "no") + " resumed next row identical=" +
                       (resume_same ? "yes" : "no") + " resumed final checkpoint identical=" +
                       (resume_ckpt ? "yes" : "no") + " write-read-write identical=" + (roundtrip ? "yes" : "no"));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    int criterion = 0;
    std::size_t seeds = 5, steps = 0;
    app.add_option("--criterion", criterion, "1-9")->required()->check(CLI::Range(1, 9));
    app.add_option("--seeds", seeds, "criterion 7: seeds per variant");
    app.add_option("--steps", steps, "criterion 7: env steps per run (0 keeps the config value)");
    CLI11_PARSE(app, argc, argv);
    try {
        bool pass = false;
        switch (criterion) {
            case 1: pass = theorem1(); break;
            case 2: pass = lemma2(); break;
            case 3: pass = gradients(); break;
            case 4: pass = td(); break;
            case 5: pass = lagrangian(); break;
            case 6: pass = bandit(); break;
            case 7: pass = smoke(seeds, steps); break;
            case 8: pass = purity(); break;
            case 9: pass = persistence(); break;
        }
        return pass ? 0 : 1;
    } catch (const std::exception& e) {
        verdict(criterion, false, std::string("error: ") + e.what());
        return 1;
    }
}
