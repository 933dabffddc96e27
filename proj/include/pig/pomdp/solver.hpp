#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pig/pomdp/alpha.hpp"

namespace pig::pomdp {

enum class BackupStrategy {
    Enumerate, // full cross-sum every stage; BackupTooLarge when above the cap
    Auto,      // cross-sum while small, point backups at the witnesses otherwise
};

struct SolverOptions {
    BackupStrategy strategy = BackupStrategy::Auto;
    std::size_t cap = 200000;
    // Auto: enumerate when the unpruned size is at most this.
    std::size_t enumeration_limit = 4096;
    // Auto: after dominance pruning, witness-prune only sets larger than this.
    std::size_t keep_limit = 4096;
};

struct StageInfo {
    std::size_t unpruned_size = 0; // |A| |Gamma_prev|^|Z|
    std::size_t stored_size = 0;   // after pruning
    bool enumerated = false;
    bool witness_pruned = false;
};

// stages[h] is Gamma_h (h steps to go); stages[0] is the zero vector.
struct SymmetricSolution {
    std::vector<AlphaSet> stages;
    std::vector<StageInfo> info; // info[h-1] describes stage h

    const AlphaSet& top() const { return stages.back(); }
    double value(std::span<const double> b) const { return top().value(b); }
    // True when no stage below the last was restricted to the witnesses, so
    // values at the witnesses are exact.
    bool exact_at_witnesses() const;
};

// Solves one payoff channel. `witnesses` is a flat [count][|S|] block.
SymmetricSolution solve_channel(const TabularCPOMDP& model, std::span<const double> payoff, std::size_t horizon,
                                std::span<const double> witnesses, const SolverOptions& options = {});

// Reward channel first, then each cost channel under max-backup.
std::vector<SymmetricSolution> solve_symmetric(const TabularCPOMDP& model, std::size_t horizon,
                                               std::span<const double> witnesses,
                                               const SolverOptions& options = {});

} // namespace pig::pomdp
