#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "pig/pomdp/random_instance.hpp"
#include "pig/pomdp/solver.hpp"

namespace pig::pomdp {

// Flat [count][dim] block: all vertices, the barycenter, then `samples`
// uniform draws from the simplex.
std::vector<double> witness_beliefs(std::size_t dim, std::size_t samples, Rng& rng);

struct ChannelMargins {
    std::string channel;
    std::size_t beliefs = 0;
    double min_margin = 0.0;
    double mean_margin = 0.0;
    double max_margin = 0.0;
    std::size_t violations = 0;
    bool exact = false; // symmetric values exact at every tested belief
};

struct Theorem1Options {
    double tolerance = 1e-9;
    SolverOptions solver{};
    // Additional random witnesses used only for pruning; they tighten the
    // symmetric values at the tested beliefs once stages stop being enumerated.
    std::size_t extra_witnesses = 4000;
    std::uint64_t witness_seed = 0x5eed;
};

struct Theorem1Report {
    std::size_t horizon = 0;
    std::vector<ChannelMargins> channels;
    std::size_t violations() const;
    bool holds() const { return violations() == 0; }
};

// Margins V_asym(b) - V_sym(b) over `beliefs`, which also serve as witnesses.
Theorem1Report verify_theorem1(const TabularCPOMDP& model, std::size_t horizon, std::span<const double> beliefs,
                               const Theorem1Options& options = {});

struct SweepOptions {
    std::size_t instances = 100;
    std::size_t beliefs = 1000;
    std::size_t min_horizon = 1;
    std::size_t max_horizon = 6;
    std::uint64_t seed = 1;
    RandomInstanceSpec instance{};
    Theorem1Options theorem{};
};

struct SweepRow {
    std::size_t instance = 0;
    std::size_t states = 0, actions = 0, observations = 0, horizon = 0;
    ChannelMargins margins;
    std::string error; // nonempty when the instance was skipped
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::size_t skipped = 0;
    std::size_t violations() const;
};

// Instances are independent and run in parallel when OpenMP is enabled; each
// instance draws from its own seeded stream so results do not depend on the
// thread count.
SweepResult theorem1_sweep(const SweepOptions& options);

void write_sweep_csv(const SweepResult& result, std::ostream& out);

} // namespace pig::pomdp
