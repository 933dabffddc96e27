#include "pig/pomdp/theorem.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "pig/pomdp/mdp.hpp"
#include "pig/util/csv.hpp"

namespace pig::pomdp {

std::vector<double> witness_beliefs(std::size_t dim, std::size_t samples, Rng& rng) {
    std::vector<double> out;
    out.reserve((dim + 1 + samples) * dim);
    for (std::size_t v = 0; v < dim; ++v)
        for (std::size_t s = 0; s < dim; ++s) out.push_back(s == v ? 1.0 : 0.0);
    for (std::size_t s = 0; s < dim; ++s) out.push_back(1.0 / static_cast<double>(dim));
    for (std::size_t i = 0; i < samples; ++i) {
        auto b = sample_simplex(rng, dim);
        out.insert(out.end(), b.begin(), b.end());
    }
    return out;
}

std::size_t Theorem1Report::violations() const {
    std::size_t total = 0;
    for (const auto& c : channels) total += c.violations;
    return total;
}

Theorem1Report verify_theorem1(const TabularCPOMDP& m, std::size_t horizon, std::span<const double> beliefs,
                               const Theorem1Options& options) {
    const std::size_t S = m.num_states;
    if (beliefs.empty() || beliefs.size() % S != 0) throw std::invalid_argument("belief block is empty or misaligned");
    const std::size_t count = beliefs.size() / S;
    Theorem1Report report;
    report.horizon = horizon;
    const auto state_values = mdp_value_iteration(m, horizon);
    std::vector<double> witnesses(beliefs.begin(), beliefs.end());
    if (options.extra_witnesses > 0) {
        Rng rng(options.witness_seed);
        const auto extra = witness_beliefs(S, options.extra_witnesses, rng);
        witnesses.insert(witnesses.end(), extra.begin() + static_cast<std::ptrdiff_t>((S + 1) * S), extra.end());
    }
    const auto symmetric = solve_symmetric(m, horizon, witnesses, options.solver);
    for (std::size_t c = 0; c < m.num_channels(); ++c) {
        std::vector<double> sym;
        std::vector<std::size_t> idx;
        symmetric[c].top().evaluate(beliefs, sym, idx);
        const auto& v = state_values[c].top();
        ChannelMargins cm;
        cm.channel = m.channel_name(c);
        cm.beliefs = count;
        cm.exact = symmetric[c].exact_at_witnesses();
        cm.min_margin = std::numeric_limits<double>::infinity();
        cm.max_margin = -std::numeric_limits<double>::infinity();
        double total = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            const double margin = asymmetric_belief_value(v, beliefs.subspan(i * S, S)) - sym[i];
            cm.min_margin = std::min(cm.min_margin, margin);
            cm.max_margin = std::max(cm.max_margin, margin);
            total += margin;
            if (margin < -options.tolerance) ++cm.violations;
        }
        cm.mean_margin = total / static_cast<double>(count);
        report.channels.push_back(cm);
    }
    return report;
}

std::size_t SweepResult::violations() const {
    std::size_t total = 0;
    for (const auto& r : rows) total += r.margins.violations;
    return total;
}

SweepResult theorem1_sweep(const SweepOptions& o) {
    if (o.min_horizon < 1 || o.min_horizon > o.max_horizon) throw std::invalid_argument("invalid horizon range");
    std::vector<std::vector<SweepRow>> per_instance(o.instances);
    const auto n = static_cast<std::ptrdiff_t>(o.instances);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto id = static_cast<std::size_t>(i);
        Rng rng(mix_seed(o.seed, id));
        const TabularCPOMDP m = random_instance(rng, o.instance);
        const std::size_t horizon = o.min_horizon + rng.index(o.max_horizon - o.min_horizon + 1);
        auto beliefs = witness_beliefs(m.num_states, o.beliefs, rng);
        SweepRow base;
        base.instance = id;
        base.states = m.num_states;
        base.actions = m.num_actions;
        base.observations = m.num_observations;
        base.horizon = horizon;
        try {
            const auto report = verify_theorem1(m, horizon, beliefs, o.theorem);
            for (const auto& c : report.channels) {
                SweepRow row = base;
                row.margins = c;
                per_instance[id].push_back(row);
            }
        } catch (const std::exception& e) {
            base.error = e.what();
            per_instance[id].push_back(base);
        }
    }
    SweepResult out;
    for (auto& rows : per_instance)
        for (auto& r : rows) {
            if (!r.error.empty()) ++out.skipped;
            out.rows.push_back(std::move(r));
        }
    return out;
}

void write_sweep_csv(const SweepResult& result, std::ostream& out) {
    out << csv::join_row({"instance", "channel", "states", "actions", "observations", "horizon", "beliefs",
                          "min_margin", "mean_margin", "max_margin", "violations", "exact", "error"})
        << '\n';
    for (const auto& r : result.rows) {
        out << csv::join_row({std::to_string(r.instance), r.margins.channel, std::to_string(r.states),
                              std::to_string(r.actions), std::to_string(r.observations), std::to_string(r.horizon),
                              std::to_string(r.margins.beliefs), csv::format_double(r.margins.min_margin),
                              csv::format_double(r.margins.mean_margin), csv::format_double(r.margins.max_margin),
                              std::to_string(r.margins.violations), r.margins.exact ? "1" : "0", r.error})
            << '\n';
    }
}

} // namespace pig::pomdp
