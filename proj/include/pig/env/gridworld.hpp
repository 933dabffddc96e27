#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pig/util/rng.hpp"

namespace pig::env {

struct Cell {
    int x = 0;
    int y = 0;
    bool operator==(const Cell&) const = default;
};

enum Action : int { Up = 0, Down = 1, Left = 2, Right = 3, Stay = 4 };
inline constexpr std::size_t kNumActions = 5;
inline constexpr std::size_t kObservationPlanes = 3; // wall, hazard, goal
inline constexpr std::size_t kActionHistory = 3;

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct GridWorldConfig {
    int width = 5;
    int height = 5;
    std::vector<Cell> hazards{{2, 1}, {1, 3}};
    std::vector<Cell> walls;
    Cell goal{4, 4};
    std::vector<Cell> starts{{0, 0}}; // uniform over these; empty means every free cell
    int window_radius = 1;
    double noise = 0.1;
    int max_steps = 200; // T_ep, counted in underlying steps
    double budget = 2.0; // per-episode cost budget
    int action_repeat = 1;
    double shaping = 0.05;
    double goal_reward = 1.0;
    std::size_t nearest_hazards = 2;

    void validate() const; // throws ConfigError
    std::vector<Cell> start_cells() const;
    bool inside(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
    bool is_wall(Cell c) const;
    bool is_hazard(Cell c) const;

    std::size_t window_side() const { return static_cast<std::size_t>(2 * window_radius + 1); }
    std::size_t observation_dim() const { return kObservationPlanes * window_side() * window_side(); }
    std::size_t privileged_dim() const { return 2 + 3 * nearest_hazards + kActionHistory * kNumActions + 2; }
};

void to_json(nlohmann::json& j, const GridWorldConfig& c);
void from_json(const nlohmann::json& j, GridWorldConfig& c);

struct StepResult {
    std::vector<double> observation;
    std::vector<double> privileged;
    double reward = 0.0;
    double cost = 0.0;
    bool terminal = false;
    bool truncated = false;
    bool done() const { return terminal || truncated; }
};

struct EpisodeLogRow {
    int t = 0;
    int action = 0;
    double reward = 0.0;
    double cost = 0.0;
    int x = 0;
    int y = 0;
};

// Everything that evolves during an episode; enough to resume exactly.
struct EnvState {
    Cell agent;
    int steps = 0;
    bool done = true;
    std::array<int, kActionHistory> last_actions{-1, -1, -1}; // most recent first, -1 = none
    Cell last_displacement;
    std::string rng;
};

class GridWorld {
public:
    explicit GridWorld(GridWorldConfig config);

    const GridWorldConfig& config() const { return config_; }

    StepResult reset(std::uint64_t seed);
    StepResult step(int action);

    // Testing hooks: put the agent on a cell (clearing history) without a reset draw.
    StepResult place(Cell cell);

    Cell agent() const { return state_.agent; }
    int steps() const { return state_.steps; }
    bool done() const { return state_.done; }

    EnvState state() const;
    void restore(const EnvState& state);

    // Noiseless window occupancy at a cell, center excluded (always zero).
    std::vector<double> clean_observation(Cell at) const;
    // Privileged vector for the current state: goal offset, nearest hazard
    // offsets with validity mask, last actions one-hot, last displacement.
    std::vector<double> privileged() const;

    void set_logging(bool on) { logging_ = on; }
    const std::vector<EpisodeLogRow>& log() const { return log_; }
    void write_log_csv(std::ostream& out) const;

    static Cell move(const GridWorldConfig& config, Cell from, int action);

private:
    std::vector<double> observe();
    StepResult result(double reward, double cost, bool terminal, bool truncated);

    GridWorldConfig config_;
    EnvState state_;
    Rng rng_;
    bool logging_ = false;
    std::vector<EpisodeLogRow> log_;
};

int manhattan(Cell a, Cell b);

} // namespace pig::env
