#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pig/env/gridworld.hpp"

namespace pig::train {

struct VerifyOptions {
    std::size_t instances = 100;
    std::size_t beliefs = 1000;
    std::size_t max_horizon = 6;
    std::uint64_t seed = 1;
    double tolerance = 1e-9;
    // gridworld-cross-check
    env::GridWorldConfig env = small_grid();
    std::size_t trials = 10000; // Monte Carlo draws per (state, action)
    double tv_threshold = 0.02;
    std::size_t grid_horizon = 3;

    static env::GridWorldConfig small_grid();
};

struct VerifyOutcome {
    std::size_t checked = 0;
    std::size_t violations = 0;
    std::size_t skipped = 0;
    std::string csv;                // report body including the header
    std::vector<std::string> notes; // informational lines
    bool ok() const { return violations == 0; }
};

// Random-instance sweep of V_asym(b) >= V_sym(b) for every channel.
VerifyOutcome verify_theorem1_suite(const VerifyOptions& options);

// Pre-prune backup sizes against |A| |Gamma|^|Z| on an |A|=2, |Z|=2 sweep plus
// the general random sweep, and zero margins on fully observable instances
// at reachable (vertex) beliefs and max_a b.Q at interior ones.
VerifyOutcome verify_lemma2(const VerifyOptions& options);

// Monte Carlo transition/observation frequencies of the simulator against the
// exported tabular model (total variation per state-action pair), then the
// value inequality on the exported model.
VerifyOutcome verify_gridworld_cross_check(const VerifyOptions& options);

} // namespace pig::train
