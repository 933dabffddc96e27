#include "pig/pomdp/solver.hpp"

#include <stdexcept>

namespace pig::pomdp {

bool SymmetricSolution::exact_at_witnesses() const {
    for (std::size_t i = 0; i + 1 < info.size(); ++i)
        if (info[i].witness_pruned || !info[i].enumerated) return false;
    return true;
}

SymmetricSolution solve_channel(const TabularCPOMDP& m, std::span<const double> payoff, std::size_t horizon,
                                std::span<const double> witnesses, const SolverOptions& options) {
    if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
    if (witnesses.empty() || witnesses.size() % m.num_states != 0)
        throw std::invalid_argument("witness block is empty or misaligned");
    SymmetricSolution sol;
    sol.stages.push_back(AlphaSet::zero(m.num_states));
    for (std::size_t h = 1; h <= horizon; ++h) {
        const AlphaSet& prev = sol.stages.back();
        StageInfo info;
        info.unpruned_size = backup_size(m.num_actions, m.num_observations, prev.size());
        AlphaSet next(m.num_states);
        if (options.strategy == BackupStrategy::Enumerate || info.unpruned_size <= options.enumeration_limit) {
            next = prune_dominated(exact_pomdp_backup(m, payoff, prev, options.cap));
            info.enumerated = true;
            if (options.strategy == BackupStrategy::Auto && next.size() > options.keep_limit) {
                next = prune_alpha_set(next, witnesses);
                info.witness_pruned = true;
            }
        } else {
            next = prune_dominated(point_backup(m, payoff, prev, witnesses));
            info.witness_pruned = true;
        }
        info.stored_size = next.size();
        sol.info.push_back(info);
        sol.stages.push_back(std::move(next));
    }
    return sol;
}

std::vector<SymmetricSolution> solve_symmetric(const TabularCPOMDP& m, std::size_t horizon,
                                               std::span<const double> witnesses, const SolverOptions& options) {
    std::vector<SymmetricSolution> out;
    for (std::size_t c = 0; c < m.num_channels(); ++c)
        out.push_back(solve_channel(m, m.channel(c), horizon, witnesses, options));
    return out;
}

} // namespace pig::pomdp
