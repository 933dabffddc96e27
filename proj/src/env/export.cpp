#include "pig/env/export.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace pig::env {

std::size_t TabularExport::state_of(Cell c) const {
    const auto it = std::find(cells.begin(), cells.end(), c);
    if (it == cells.end()) throw std::out_of_range("cell is not a tabular state");
    return static_cast<std::size_t>(it - cells.begin());
}

std::size_t TabularExport::observation_of(const std::vector<double>& window) const {
    const auto it = std::find(patterns.begin(), patterns.end(), window);
    return static_cast<std::size_t>(it - patterns.begin());
}

TabularExport export_tabular(const GridWorldConfig& config, const ExportOptions& options) {
    config.validate();
    TabularExport out;
    for (int y = 0; y < config.height; ++y)
        for (int x = 0; x < config.width; ++x)
            if (!config.is_wall({x, y})) out.cells.push_back({x, y});
    const std::size_t S = out.cells.size(), A = kNumActions;
    if (S > options.max_states) {
        std::ostringstream os;
        os << "export: " << S << " states exceed the cap of " << options.max_states;
        throw ConfigError(os.str());
    }

    GridWorld probe(config);
    std::vector<std::size_t> pattern_of(S);
    for (std::size_t s = 0; s < S; ++s) {
        auto w = probe.clean_observation(out.cells[s]);
        auto idx = out.observation_of(w);
        if (idx == out.patterns.size()) out.patterns.push_back(std::move(w));
        pattern_of[s] = idx;
    }
    const std::size_t Z = out.patterns.size();
    if (Z > options.max_observations) {
        std::ostringstream os;
        os << "export: " << Z << " window patterns exceed the cap of " << options.max_observations;
        throw ConfigError(os.str());
    }

    auto& m = out.model;
    m.num_states = S;
    m.num_actions = A;
    m.num_observations = Z;
    m.gamma = options.gamma;
    m.transition.assign(S * A * S, 0.0);
    m.observation.assign(S * A * Z, 0.0);
    m.reward.assign(S * A, 0.0);
    m.costs.assign(1, std::vector<double>(S * A, 0.0));
    m.budgets = {config.budget};

    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            Cell at = out.cells[s];
            double r = 0.0, c = 0.0;
            if (!(at == config.goal)) {
                for (int rep = 0; rep < config.action_repeat; ++rep) {
                    const Cell to = GridWorld::move(config, at, static_cast<int>(a));
                    r += config.shaping * (manhattan(at, config.goal) - manhattan(to, config.goal));
                    if (config.is_hazard(to)) c += 1.0;
                    at = to;
                    if (to == config.goal) {
                        r += config.goal_reward;
                        break;
                    }
                }
            }
            m.transition[(s * A + a) * S + out.state_of(at)] = 1.0;
            m.reward[s * A + a] = r;
            m.costs[0][s * A + a] = c;
        }
    }

    // Hamming likelihood over the non-center bits, renormalized over Z
    const std::size_t area = config.window_side() * config.window_side(), center = area / 2;
    const std::size_t bits = config.observation_dim() - kObservationPlanes;
    for (std::size_t sp = 0; sp < S; ++sp) {
        std::vector<double> lik(Z);
        double total = 0.0;
        const auto& truth = out.patterns[pattern_of[sp]];
        for (std::size_t z = 0; z < Z; ++z) {
            std::size_t d = 0;
            for (std::size_t i = 0; i < truth.size(); ++i)
                if (i % area != center && truth[i] != out.patterns[z][i]) ++d;
            double l;
            if (config.noise == 0.0) {
                l = d == 0 ? 1.0 : 0.0;
            } else {
                l = std::pow(config.noise, static_cast<double>(d)) *
                    std::pow(1.0 - config.noise, static_cast<double>(bits - d));
            }
            lik[z] = l;
            total += l;
        }
        if (!(total > 0.0)) throw ConfigError("export: noise rate leaves a state with no possible observation");
        for (std::size_t a = 0; a < A; ++a)
            for (std::size_t z = 0; z < Z; ++z) m.observation[(sp * A + a) * Z + z] = lik[z] / total;
    }

    const auto starts = config.start_cells();
    m.initial_belief.assign(S, 0.0);
    for (const auto& c : starts) m.initial_belief[out.state_of(c)] += 1.0 / static_cast<double>(starts.size());
    m.validate(1e-9);
    return out;
}

} // namespace pig::env
