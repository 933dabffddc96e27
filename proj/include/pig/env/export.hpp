#pragma once

#include <cstddef>
#include <vector>

#include "pig/env/gridworld.hpp"
#include "pig/pomdp/model.hpp"

namespace pig::env {

struct ExportOptions {
    double gamma = 0.95;
    std::size_t max_states = 25;
    std::size_t max_observations = 4096;
};

struct TabularExport {
    pomdp::TabularCPOMDP model;
    std::vector<Cell> cells;                    // state index -> cell
    std::vector<std::vector<double>> patterns;  // observation index -> noiseless window
    std::size_t state_of(Cell c) const;         // throws when c is not a state
    // Index of an exact window pattern, or patterns.size() when it is not in Z.
    std::size_t observation_of(const std::vector<double>& window) const;
};

// States are the non-wall cells; the goal is absorbing with zero payoff.
// Observations are the distinct noiseless windows; bit-flip noise enters O as
// a Hamming likelihood renormalized over those patterns. One tabular step is
// one agent step, i.e. action_repeat underlying moves. Throws ConfigError
// when a cap is exceeded.
TabularExport export_tabular(const GridWorldConfig& config, const ExportOptions& options = {});

} // namespace pig::env
