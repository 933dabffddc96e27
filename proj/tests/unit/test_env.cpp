#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "pig/env/export.hpp"
#include "pig/env/gridworld.hpp"
#include "pig/env/replay.hpp"
#include "pig/pomdp/theorem.hpp"
#include "pig/util/csv.hpp"

using namespace pig;
using namespace pig::env;

namespace {

GridWorldConfig corridor() {
    GridWorldConfig c;
    c.width = 5;
    c.height = 1;
    c.hazards = {};
    c.goal = {4, 0};
    c.starts = {{0, 0}};
    c.noise = 0.0;
    c.shaping = 0.1;
    return c;
}

GridWorldConfig small3() {
    GridWorldConfig c;
    c.width = 3;
    c.height = 3;
    c.hazards = {{1, 1}};
    c.goal = {2, 2};
    c.starts = {};
    c.noise = 0.0;
    return c;
}

Transition to_transition(const StepResult& r, int prev_action, bool first) {
    return {r.observation, r.privileged, prev_action, r.reward, r.cost, first, r.terminal};
}

} // namespace

TEST_CASE("config validation") {
    GridWorldConfig c;
    CHECK_NOTHROW(c.validate());
    c.goal = c.hazards[0];
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = GridWorldConfig{};
    c.window_radius = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = GridWorldConfig{};
    c.budget = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    // goal sealed off by walls
    c = GridWorldConfig{};
    c.walls = {{3, 4}, {4, 3}};
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("unreachable"), ConfigError);
}

TEST_CASE("config json round-trips") {
    GridWorldConfig c = small3();
    c.walls = {{0, 2}};
    nlohmann::json j = c;
    GridWorldConfig back = j.get<GridWorldConfig>();
    CHECK(nlohmann::json(back) == j);
    CHECK(back.walls == c.walls);
    CHECK(back.goal == c.goal);
}

TEST_CASE("reset is deterministic under a seed") {
    GridWorldConfig c;
    c.starts = {};
    GridWorld a(c), b(c);
    const auto ra = a.reset(123), rb = b.reset(123);
    CHECK(ra.observation == rb.observation);
    CHECK(ra.privileged == rb.privileged);
    CHECK(a.agent() == b.agent());
}

TEST_CASE("window at the center matches the neighborhood") {
    GridWorldConfig c;
    c.hazards = {{1, 1}, {3, 2}};
    c.goal = {2, 3};
    c.noise = 0.0;
    GridWorld env(c);
    const auto r = env.place({2, 2});
    const std::size_t area = 9;
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
            const std::size_t i = static_cast<std::size_t>((dy + 1) * 3 + dx + 1);
            const Cell cell{2 + dx, 2 + dy};
            const bool center = dx == 0 && dy == 0;
            CHECK(r.observation[i] == 0.0);
            CHECK(r.observation[area + i] == (!center && c.is_hazard(cell) ? 1.0 : 0.0));
            CHECK(r.observation[2 * area + i] == (!center && cell == c.goal ? 1.0 : 0.0));
        }
    // corner: out-of-grid cells read as wall
    const auto corner = env.place({0, 0});
    CHECK(corner.observation[0] == 1.0);
    CHECK(corner.observation[1] == 1.0);
    CHECK(corner.observation[3] == 1.0);
    CHECK(corner.observation[5] == 0.0);
    CHECK(corner.observation[8] == 0.0);
}

TEST_CASE("noise zero leaves the ground truth; noise flips bits") {
    GridWorldConfig c;
    c.noise = 0.0;
    GridWorld env(c);
    const auto r = env.reset(1);
    CHECK(r.observation == env.clean_observation(env.agent()));
    c.noise = 0.3;
    GridWorld noisy(c);
    std::size_t flips = 0, total = 0;
    for (int i = 0; i < 400; ++i) {
        const auto rr = noisy.reset(static_cast<std::uint64_t>(i));
        const auto clean = noisy.clean_observation(noisy.agent());
        for (std::size_t k = 0; k < clean.size(); ++k) {
            if (k % 9 == 4) {
                CHECK(rr.observation[k] == 0.0);
                continue;
            }
            ++total;
            flips += rr.observation[k] != clean[k];
        }
    }
    CHECK(static_cast<double>(flips) / total == doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("stay on an empty cell costs and earns nothing") {
    GridWorld env(corridor());
    env.reset(0);
    const auto r = env.step(Stay);
    CHECK(r.reward == 0.0);
    CHECK(r.cost == 0.0);
}

TEST_CASE("stepping onto a hazard costs one") {
    GridWorldConfig c = corridor();
    c.hazards = {{1, 0}};
    GridWorld env(c);
    env.reset(0);
    CHECK(env.step(Right).cost == 1.0);
    CHECK(env.step(Right).cost == 0.0);
}

TEST_CASE("corridor walk earns shaping plus the goal reward") {
    GridWorld env(corridor());
    env.reset(0);
    double total = 0.0;
    StepResult r;
    for (int i = 0; i < 4; ++i) {
        r = env.step(Right);
        total += r.reward;
    }
    CHECK(r.terminal);
    CHECK(total == doctest::Approx(4 * 0.1 + 1.0).epsilon(1e-14));
    CHECK_THROWS_AS(env.step(Right), std::logic_error);
}

TEST_CASE("action repeat sums micro-step payoffs") {
    GridWorldConfig c = corridor();
    c.action_repeat = 2;
    c.hazards = {{1, 0}, {2, 0}};
    GridWorld env(c);
    env.reset(0);
    const auto r = env.step(Right);
    CHECK(r.cost == 2.0);
    CHECK(r.reward == doctest::Approx(0.2));
    CHECK(env.steps() == 2);
    const auto r2 = env.step(Right);
    CHECK(r2.terminal);
    CHECK(r2.reward == doctest::Approx(0.2 + 1.0));
}

TEST_CASE("walls block movement and truncation ends episodes") {
    GridWorldConfig c = corridor();
    c.max_steps = 3;
    GridWorld env(c);
    env.reset(0);
    CHECK(env.step(Left).reward == 0.0);
    CHECK(env.agent() == Cell{0, 0});
    env.step(Up);
    const auto r = env.step(Stay);
    CHECK(r.truncated);
    CHECK_FALSE(r.terminal);
}

TEST_CASE("privileged vector layout") {
    GridWorldConfig c;
    c.hazards = {{2, 1}, {1, 3}, {4, 0}};
    c.goal = {4, 4};
    c.starts = {{0, 0}};
    GridWorld env(c);
    auto r = env.reset(0);
    REQUIRE(r.privileged.size() == c.privileged_dim());
    CHECK(c.privileged_dim() == 25);
    CHECK(r.privileged[0] == 4);
    CHECK(r.privileged[1] == 4);
    // nearest two hazards from (0,0): (2,1) and (1,3), both at distance 3 and 4
    CHECK(r.privileged[2] == 2);
    CHECK(r.privileged[3] == 1);
    CHECK(r.privileged[4] == 1);
    CHECK(r.privileged[5] == 1);
    CHECK(r.privileged[6] == 3);
    for (std::size_t i = 8; i < 25; ++i) CHECK(r.privileged[i] == 0.0);
    r = env.step(Right);
    CHECK(r.privileged[0] == 3);
    CHECK(r.privileged[8 + Right] == 1.0);
    CHECK(r.privileged[23] == 1.0);
    CHECK(r.privileged[24] == 0.0);
    r = env.step(Down);
    CHECK(r.privileged[8 + Down] == 1.0);
    CHECK(r.privileged[13 + Right] == 1.0);

    // padding with mask 0 when there are fewer hazards than slots
    GridWorldConfig d = corridor();
    GridWorld e2(d);
    const auto p = e2.reset(0);
    CHECK(p.privileged[4] == 0.0);
    CHECK(p.privileged[7] == 0.0);
}

TEST_CASE("random play: costs only on hazards and goal offset is exact") {
    GridWorldConfig c;
    c.starts = {};
    GridWorld env(c);
    Rng r(5);
    for (int ep = 0; ep < 30; ++ep) {
        env.reset(static_cast<std::uint64_t>(ep));
        double cost = 0.0;
        StepResult s;
        do {
            s = env.step(static_cast<int>(r.index(kNumActions)));
            cost += s.cost;
            CHECK(s.cost == (c.is_hazard(env.agent()) ? 1.0 : 0.0));
            CHECK(s.privileged[0] == c.goal.x - env.agent().x);
            CHECK(s.privileged[1] == c.goal.y - env.agent().y);
        } while (!s.done());
        CHECK(cost <= c.max_steps);
    }
}

TEST_CASE("identical seed and actions give identical trajectories") {
    GridWorldConfig c;
    c.noise = 0.2;
    GridWorld a(c), b(c);
    a.reset(9);
    b.reset(9);
    for (int t = 0; t < 50 && !a.done(); ++t) {
        const int act = (t * 7) % 5;
        const auto ra = a.step(act), rb = b.step(act);
        CHECK(ra.observation == rb.observation);
        CHECK(ra.reward == rb.reward);
    }
}

TEST_CASE("state snapshot restores the exact continuation") {
    GridWorldConfig c;
    c.noise = 0.2;
    GridWorld a(c);
    a.reset(4);
    a.step(Right);
    const auto snap = a.state();
    const auto r1 = a.step(Down);
    GridWorld b(c);
    b.restore(snap);
    const auto r2 = b.step(Down);
    CHECK(r1.observation == r2.observation);
    CHECK(r1.privileged == r2.privileged);
}

TEST_CASE("episode log csv") {
    GridWorld env(corridor());
    env.set_logging(true);
    env.reset(0);
    env.step(Right);
    env.step(Right);
    std::ostringstream os;
    env.write_log_csv(os);
    const auto rows = csv::parse(os.str());
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::vector<std::string>{"t", "a", "r", "c", "x", "y"});
    CHECK(rows[2][4] == "2");
}

TEST_CASE("replay: one episode of length T is returned as is") {
    GridWorld env(corridor());
    ReplayBuffer buf(100, corridor().observation_dim(), corridor().privileged_dim(), kNumActions);
    auto r = env.reset(0);
    buf.add(to_transition(r, -1, true));
    for (int i = 0; i < 4; ++i) buf.add(to_transition(env.step(Right), Right, false));
    Rng rng(1);
    CHECK_FALSE(ReplayBuffer(10, 27, 25, 5).sample(1, 2, rng).has_value());
    auto batch = buf.sample(2, 5, rng);
    REQUIRE(batch.has_value());
    for (std::size_t b = 0; b < 2; ++b) {
        CHECK(batch->starts[b] == 0);
        CHECK(batch->is_first[b] == 1.0);
        for (std::size_t t = 1; t < 5; ++t) CHECK(batch->is_first[t * 2 + b] == 0.0);
        CHECK(batch->is_terminal[4 * 2 + b] == 1.0);
        CHECK(batch->prev_action[(1 * 2 + b) * 5 + Right] == 1.0);
    }
    double total = 0.0;
    for (std::size_t t = 0; t < 5; ++t) total += batch->reward[t * 2];
    CHECK(total == doctest::Approx(1.4));
}

TEST_CASE("replay: reset flags sit exactly at stored episode starts") {
    GridWorldConfig c;
    c.max_steps = 7;
    GridWorld env(c);
    ReplayBuffer buf(50, c.observation_dim(), c.privileged_dim(), kNumActions);
    std::vector<bool> first_flags;
    Rng r(3);
    for (int ep = 0; ep < 10; ++ep) {
        auto s = env.reset(static_cast<std::uint64_t>(ep));
        buf.add(to_transition(s, -1, true));
        first_flags.push_back(true);
        while (!s.done()) {
            const int a = static_cast<int>(r.index(kNumActions));
            s = env.step(a);
            buf.add(to_transition(s, a, false));
            first_flags.push_back(false);
        }
    }
    // ring kept the newest 50 steps
    const std::size_t offset = first_flags.size() - buf.size();
    for (std::size_t i = 0; i < buf.size(); ++i) CHECK(buf.at(i).is_first == first_flags[offset + i]);
    auto batch = buf.sample(8, 10, r);
    REQUIRE(batch.has_value());
    for (std::size_t b = 0; b < 8; ++b)
        for (std::size_t t = 0; t < 10; ++t) {
            const bool flag = batch->is_first[t * 8 + b] == 1.0;
            CHECK(flag == first_flags[offset + batch->starts[b] + t]);
            // no previous action at an episode start
            if (flag) {
                double any = 0.0;
                for (std::size_t a = 0; a < kNumActions; ++a) any += batch->prev_action[(t * 8 + b) * 5 + a];
                CHECK(any == 0.0);
            }
        }
}

TEST_CASE("replay: start indices are uniform") {
    ReplayBuffer buf(40, 1, 1, 2);
    for (int i = 0; i < 40; ++i) buf.add({{double(i)}, {0.0}, 0, 0, 0, i == 0, false});
    Rng r(77);
    const std::size_t T = 11, windows = 40 - T + 1;
    std::vector<double> counts(windows, 0.0);
    const int draws = 100000;
    for (int d = 0; d < draws / 10; ++d) {
        auto b = buf.sample(10, T, r);
        for (auto s : b->starts) counts[s] += 1.0;
    }
    const double expected = static_cast<double>(draws) / windows;
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    // 29 degrees of freedom; the 0.999 quantile is about 58.3
    CHECK(chi2 < 58.3);
}

TEST_CASE("replay: deterministic sampling and persistence") {
    ReplayBuffer buf(16, 2, 1, 3);
    for (int i = 0; i < 20; ++i) buf.add({{double(i), 1.0}, {0.5 * i}, i % 3, 0.1 * i, double(i % 2), i % 5 == 0, false});
    Rng a(5), b(5);
    CHECK(buf.sample(4, 6, a)->observation == buf.sample(4, 6, b)->observation);
    std::stringstream ss;
    buf.save(ss);
    ReplayBuffer copy(16, 2, 1, 3);
    copy.load(ss);
    CHECK(copy == buf);
    std::stringstream s1, s2;
    buf.save(s1);
    copy.save(s2);
    CHECK(s1.str() == s2.str());
    ReplayBuffer wrong(8, 2, 1, 3);
    std::stringstream s3(s1.str());
    CHECK_THROWS(wrong.load(s3));
}

TEST_CASE("export: degenerate window gives one observation") {
    GridWorldConfig c;
    c.width = 2;
    c.height = 2;
    c.hazards = {{1, 0}};
    c.goal = {1, 1};
    c.starts = {{0, 0}};
    c.window_radius = 0;
    const auto ex = export_tabular(c);
    CHECK(ex.model.num_states == 4);
    CHECK(ex.model.num_observations == 1);
    for (double o : ex.model.observation) CHECK(o == 1.0);
}

TEST_CASE("export: caps are enforced") {
    GridWorldConfig c;
    c.width = 6;
    c.height = 5;
    CHECK_THROWS_AS(export_tabular(c), ConfigError);
    ExportOptions o;
    o.max_observations = 2;
    CHECK_THROWS_WITH_AS(export_tabular(small3(), o), doctest::Contains("patterns"), ConfigError);
}

TEST_CASE("export matches simulated transitions and observations") {
    for (double noise : {0.0, 0.1}) {
        GridWorldConfig c = small3();
        c.noise = noise;
        const auto ex = export_tabular(c);
        const auto& m = ex.model;
        GridWorld env(c);
        Rng seeds(11);
        for (std::size_t s = 0; s < m.num_states; ++s) {
            if (ex.cells[s] == c.goal) continue;
            for (std::size_t a = 0; a < m.num_actions; ++a) {
                std::vector<double> next(m.num_states, 0.0), obs(m.num_observations, 0.0);
                double in_z = 0.0, reward = 0.0, cost = 0.0;
                const int trials = 10000;
                for (int t = 0; t < trials; ++t) {
                    env.reset(seeds.next());
                    env.place(ex.cells[s]);
                    const auto r = env.step(static_cast<int>(a));
                    const std::size_t sp = ex.state_of(env.agent());
                    next[sp] += 1.0 / trials;
                    reward = r.reward;
                    cost = r.cost;
                    const std::size_t z = ex.observation_of(r.observation);
                    if (z < m.num_observations) {
                        obs[z] += 1.0;
                        in_z += 1.0;
                    }
                }
                double tv = 0.0;
                for (std::size_t sp = 0; sp < m.num_states; ++sp) tv += 0.5 * std::abs(next[sp] - m.P(s, a, sp));
                CHECK(tv < 0.02);
                CHECK(reward == doctest::Approx(m.R(s, a)).epsilon(1e-14));
                CHECK(cost == m.C(0, s, a));
                const std::size_t sp = ex.state_of(GridWorld::move(c, ex.cells[s], static_cast<int>(a)));
                double tvo = 0.0;
                for (std::size_t z = 0; z < m.num_observations; ++z)
                    tvo += 0.5 * std::abs(obs[z] / in_z - m.O(sp, a, z));
                CHECK(tvo < 0.02);
            }
        }
    }
}

TEST_CASE("exported models satisfy the asymmetric value inequality") {
    for (double noise : {0.0, 0.1}) {
        GridWorldConfig c = small3();
        c.noise = noise;
        const auto ex = export_tabular(c);
        Rng r(3);
        const auto beliefs = pomdp::witness_beliefs(ex.model.num_states, 300, r);
        const auto report = pomdp::verify_theorem1(ex.model, 3, beliefs);
        CHECK(report.holds());
    }
}
