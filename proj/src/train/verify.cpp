#include "pig/train/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pig/env/export.hpp"
#include "pig/pomdp/mdp.hpp"
#include "pig/pomdp/theorem.hpp"
#include "pig/util/csv.hpp"

namespace pig::train {

namespace {

using csv::format_double;

std::span<const double> channel_payoff(const pomdp::TabularCPOMDP& m, std::size_t c) {
    return c == 0 ? std::span<const double>(m.reward) : std::span<const double>(m.costs[c - 1]);
}

std::string channel_name(std::size_t c) { return c == 0 ? "reward" : "cost" + std::to_string(c - 1); }

std::string row(const std::vector<std::string>& fields) { return csv::join_row(fields) + "\n"; }

} // namespace

env::GridWorldConfig VerifyOptions::small_grid() {
    env::GridWorldConfig c;
    c.width = 3;
    c.height = 3;
    c.hazards = {{1, 1}};
    c.goal = {2, 2};
    c.starts = {{0, 0}};
    c.noise = 0.1;
    c.max_steps = 50;
    return c;
}

VerifyOutcome verify_theorem1_suite(const VerifyOptions& options) {
    pomdp::SweepOptions sweep;
    sweep.instances = options.instances;
    sweep.beliefs = options.beliefs;
    sweep.max_horizon = options.max_horizon;
    sweep.seed = options.seed;
    sweep.theorem.tolerance = options.tolerance;
    const auto result = pomdp::theorem1_sweep(sweep);

    VerifyOutcome out;
    std::ostringstream body;
    pomdp::write_sweep_csv(result, body);
    out.csv = body.str();
    out.checked = result.rows.size() - result.skipped;
    out.violations = result.violations();
    out.skipped = result.skipped;
    double worst = 1e300;
    for (const auto& r : result.rows)
        if (r.error.empty()) worst = std::min(worst, r.margins.min_margin);
    out.notes.push_back("theorem1: " + std::to_string(out.checked) + " channel rows, " +
                        std::to_string(out.violations) + " violations, min margin " + format_double(worst));
    return out;
}

VerifyOutcome verify_lemma2(const VerifyOptions& options) {
    VerifyOutcome out;
    std::ostringstream body;
    body << row({"kind", "instance", "states", "actions", "observations", "channel", "stage", "prev_size",
                 "expected", "pre_prune", "stored", "ok"});

    Rng rng(options.seed);
    const std::size_t cap = 200000;
    auto size_sweep = [&](const char* kind, const pomdp::RandomInstanceSpec& spec) {
        for (std::size_t i = 0; i < options.instances; ++i) {
            const auto m = pomdp::random_instance(rng, spec);
            const auto witnesses = pomdp::witness_beliefs(m.num_states, 200, rng);
            for (std::size_t c = 0; c < m.num_channels(); ++c) {
                auto prev = pomdp::AlphaSet::zero(m.num_states);
                for (std::size_t h = 1; h <= options.max_horizon; ++h) {
                    const std::size_t expected = pomdp::backup_size(m.num_actions, m.num_observations, prev.size());
                    if (expected > cap) {
                        ++out.skipped;
                        break;
                    }
                    const auto full = pomdp::exact_pomdp_backup(m, channel_payoff(m, c), prev, cap);
                    const auto pruned = pomdp::prune_alpha_set(full, witnesses);
                    const bool ok = full.size() == expected;
                    ++out.checked;
                    if (!ok) ++out.violations;
                    body << row({kind, std::to_string(i), std::to_string(m.num_states),
                                 std::to_string(m.num_actions), std::to_string(m.num_observations), channel_name(c),
                                 std::to_string(h), std::to_string(prev.size()), std::to_string(expected),
                                 std::to_string(full.size()), std::to_string(pruned.size()), ok ? "1" : "0"});
                    prev = pruned;
                }
            }
        }
    };
    pomdp::RandomInstanceSpec a2z2;
    a2z2.min_actions = a2z2.max_actions = 2;
    a2z2.min_observations = a2z2.max_observations = 2;
    size_sweep("sizes_a2z2", a2z2);
    size_sweep("sizes_random", pomdp::RandomInstanceSpec{});

    // Fully observable: after the first observation every belief is a point
    // mass, so the margin is zero at the vertices. At an interior belief the
    // symmetric value still commits to one first action.
    body << row({"kind", "instance", "states", "actions", "observations", "channel", "horizon", "vertex_max_abs",
                 "interior_closed_form_max_abs", "interior_max_margin", "", "ok"});
    double literal_worst = 0.0;
    for (std::size_t i = 0; i < std::max<std::size_t>(1, options.instances / 5); ++i) {
        const auto m = pomdp::make_fully_observable(pomdp::random_instance(rng));
        const std::size_t h = 1 + rng.index(options.max_horizon);
        const auto w = pomdp::witness_beliefs(m.num_states, 300, rng);
        const auto sol = pomdp::solve_symmetric(m, h, w);
        const auto vi = pomdp::mdp_value_iteration(m, h);
        const std::size_t S = m.num_states, A = m.num_actions;
        for (std::size_t c = 0; c < m.num_channels(); ++c) {
            double vertex = 0.0, closed = 0.0, interior = 0.0;
            for (std::size_t k = 0; k < w.size() / S; ++k) {
                std::span<const double> b(w.data() + k * S, S);
                const double margin = pomdp::asymmetric_belief_value(vi[c].top(), b) - sol[c].value(b);
                if (k < S) {
                    vertex = std::max(vertex, std::abs(margin));
                    continue;
                }
                double best = -1e300;
                for (std::size_t a = 0; a < A; ++a) {
                    double q = 0.0;
                    for (std::size_t s = 0; s < S; ++s) q += b[s] * vi[c].q[s * A + a];
                    best = std::max(best, q);
                }
                closed = std::max(closed, std::abs(sol[c].value(b) - best));
                interior = std::max(interior, margin);
            }
            literal_worst = std::max(literal_worst, interior);
            const bool ok = vertex <= options.tolerance && closed <= options.tolerance;
            ++out.checked;
            if (!ok) ++out.violations;
            body << row({"fully_observable", std::to_string(i), std::to_string(S), std::to_string(A),
                         std::to_string(m.num_observations), channel_name(c), std::to_string(h),
                         format_double(vertex), format_double(closed), format_double(interior), "",
                         ok ? "1" : "0"});
        }
    }
    out.notes.push_back("lemma2: largest fully observable margin at an interior belief " +
                        format_double(literal_worst) + " (zero only at point-mass beliefs)");
    out.csv = body.str();
    return out;
}

VerifyOutcome verify_gridworld_cross_check(const VerifyOptions& options) {
    VerifyOutcome out;
    const auto ex = env::export_tabular(options.env);
    const auto& m = ex.model;
    std::ostringstream body;
    body << row({"state", "x", "y", "action", "tv_transition", "tv_observation", "reward_match", "cost_match", "ok"});
    env::GridWorld sim(options.env);
    Rng seeds(options.seed);
    double worst = 0.0;
    for (std::size_t s = 0; s < m.num_states; ++s) {
        if (ex.cells[s] == options.env.goal) continue;
        for (std::size_t a = 0; a < m.num_actions; ++a) {
            std::vector<double> next(m.num_states, 0.0), obs(m.num_observations, 0.0);
            double in_z = 0.0;
            bool reward_ok = true, cost_ok = true;
            for (std::size_t t = 0; t < options.trials; ++t) {
                sim.reset(seeds.next());
                sim.place(ex.cells[s]);
                const auto r = sim.step(static_cast<int>(a));
                next[ex.state_of(sim.agent())] += 1.0;
                reward_ok = reward_ok && std::abs(r.reward - m.R(s, a)) <= 1e-12;
                cost_ok = cost_ok && r.cost == m.C(0, s, a);
                const std::size_t z = ex.observation_of(r.observation);
                if (z < m.num_observations) {
                    obs[z] += 1.0;
                    in_z += 1.0;
                }
            }
            const double n = static_cast<double>(options.trials);
            const std::size_t sp = ex.state_of(env::GridWorld::move(options.env, ex.cells[s], static_cast<int>(a)));
            double tv = 0.0, tvo = 0.0;
            for (std::size_t k = 0; k < m.num_states; ++k) tv += 0.5 * std::abs(next[k] / n - m.P(s, a, k));
            for (std::size_t z = 0; z < m.num_observations; ++z)
                tvo += 0.5 * std::abs((in_z > 0 ? obs[z] / in_z : 0.0) - m.O(sp, a, z));
            worst = std::max({worst, tv, tvo});
            const bool ok = tv < options.tv_threshold && tvo < options.tv_threshold && reward_ok && cost_ok;
            ++out.checked;
            if (!ok) ++out.violations;
            body << row({std::to_string(s), std::to_string(ex.cells[s].x), std::to_string(ex.cells[s].y),
                         std::to_string(a), format_double(tv), format_double(tvo), reward_ok ? "1" : "0",
                         cost_ok ? "1" : "0", ok ? "1" : "0"});
        }
    }
    Rng brng(options.seed ^ 0x7e57);
    const auto beliefs = pomdp::witness_beliefs(m.num_states, options.beliefs, brng);
    pomdp::Theorem1Options topt;
    topt.tolerance = options.tolerance;
    const auto report = pomdp::verify_theorem1(m, options.grid_horizon, beliefs, topt);
    body << "\n" << row({"channel", "beliefs", "min_margin", "mean_margin", "max_margin", "violations", "exact"});
    for (const auto& ch : report.channels) {
        body << row({ch.channel, std::to_string(ch.beliefs), format_double(ch.min_margin),
                     format_double(ch.mean_margin), format_double(ch.max_margin), std::to_string(ch.violations),
                     ch.exact ? "1" : "0"});
        ++out.checked;
    }
    out.violations += report.violations();
    out.notes.push_back("gridworld-cross-check: " + std::to_string(m.num_states) + " states, " +
                        std::to_string(m.num_observations) + " observations, max TV " + format_double(worst) +
                        ", theorem1 violations " + std::to_string(report.violations()));
    out.csv = body.str();
    return out;
}

} // namespace pig::train
