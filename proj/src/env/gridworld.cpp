#include "pig/env/gridworld.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <sstream>

#include "pig/util/csv.hpp"

namespace pig::env {

using nlohmann::json;

int manhattan(Cell a, Cell b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

bool GridWorldConfig::is_wall(Cell c) const {
    return !inside(c) || std::find(walls.begin(), walls.end(), c) != walls.end();
}

bool GridWorldConfig::is_hazard(Cell c) const { return std::find(hazards.begin(), hazards.end(), c) != hazards.end(); }

std::vector<Cell> GridWorldConfig::start_cells() const {
    if (!starts.empty()) return starts;
    std::vector<Cell> out;
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const Cell c{x, y};
            if (!is_wall(c) && !is_hazard(c) && !(c == goal)) out.push_back(c);
        }
    return out;
}

void GridWorldConfig::validate() const {
    auto fail = [](const std::string& m) { throw ConfigError("grid config: " + m); };
    if (width < 1 || height < 1) fail("grid must be at least 1x1");
    if (window_radius < 0) fail("window radius must be >= 0");
    if (!(noise >= 0.0 && noise <= 1.0)) fail("noise rate must lie in [0, 1]");
    if (max_steps < 1) fail("max_steps must be >= 1");
    if (!(budget >= 0.0)) fail("budget must be >= 0");
    if (action_repeat < 1) fail("action_repeat must be >= 1");
    if (!inside(goal) || is_wall(goal)) fail("goal must be a free cell inside the grid");
    if (is_hazard(goal)) fail("goal must not be a hazard");
    for (const auto& h : hazards)
        if (!inside(h)) fail("hazard outside the grid");
    const auto s = start_cells();
    if (s.empty()) fail("no start cell");
    for (const auto& c : s)
        if (is_wall(c) || c == goal) fail("start cells must be free and differ from the goal");

    // flood fill from the goal over non-wall cells
    std::vector<char> seen(static_cast<std::size_t>(width * height), 0);
    std::deque<Cell> frontier{goal};
    seen[static_cast<std::size_t>(goal.y * width + goal.x)] = 1;
    while (!frontier.empty()) {
        const Cell c = frontier.front();
        frontier.pop_front();
        for (int a = 0; a < 4; ++a) {
            const Cell n = GridWorld::move(*this, c, a);
            auto& flag = seen[static_cast<std::size_t>(n.y * width + n.x)];
            if (!flag) {
                flag = 1;
                frontier.push_back(n);
            }
        }
    }
    for (const auto& c : s)
        if (!seen[static_cast<std::size_t>(c.y * width + c.x)]) {
            std::ostringstream os;
            os << "goal unreachable from start (" << c.x << "," << c.y << ")";
            fail(os.str());
        }
}

namespace {

json cells_to_json(const std::vector<Cell>& cells) {
    json out = json::array();
    for (const auto& c : cells) out.push_back({c.x, c.y});
    return out;
}

std::vector<Cell> cells_from_json(const json& j) {
    std::vector<Cell> out;
    for (const auto& c : j) out.push_back({c.at(0).get<int>(), c.at(1).get<int>()});
    return out;
}

} // namespace

void to_json(json& j, const GridWorldConfig& c) {
    j = json{{"width", c.width},
             {"height", c.height},
             {"hazards", cells_to_json(c.hazards)},
             {"walls", cells_to_json(c.walls)},
             {"goal", {c.goal.x, c.goal.y}},
             {"starts", cells_to_json(c.starts)},
             {"window_radius", c.window_radius},
             {"noise", c.noise},
             {"max_steps", c.max_steps},
             {"budget", c.budget},
             {"action_repeat", c.action_repeat},
             {"shaping", c.shaping},
             {"goal_reward", c.goal_reward},
             {"nearest_hazards", c.nearest_hazards}};
}

void from_json(const json& j, GridWorldConfig& c) {
    GridWorldConfig d;
    c.width = j.value("width", d.width);
    c.height = j.value("height", d.height);
    c.hazards = j.contains("hazards") ? cells_from_json(j.at("hazards")) : d.hazards;
    c.walls = j.contains("walls") ? cells_from_json(j.at("walls")) : d.walls;
    if (j.contains("goal")) {
        c.goal = {j.at("goal").at(0).get<int>(), j.at("goal").at(1).get<int>()};
    } else {
        c.goal = d.goal;
    }
    c.starts = j.contains("starts") ? cells_from_json(j.at("starts")) : d.starts;
    c.window_radius = j.value("window_radius", d.window_radius);
    c.noise = j.value("noise", d.noise);
    c.max_steps = j.value("max_steps", d.max_steps);
    c.budget = j.value("budget", d.budget);
    c.action_repeat = j.value("action_repeat", d.action_repeat);
    c.shaping = j.value("shaping", d.shaping);
    c.goal_reward = j.value("goal_reward", d.goal_reward);
    c.nearest_hazards = j.value("nearest_hazards", d.nearest_hazards);
}

GridWorld::GridWorld(GridWorldConfig config) : config_(std::move(config)) { config_.validate(); }

Cell GridWorld::move(const GridWorldConfig& c, Cell from, int action) {
    Cell to = from;
    switch (action) {
    case Up: to.y -= 1; break;
    case Down: to.y += 1; break;
    case Left: to.x -= 1; break;
    case Right: to.x += 1; break;
    case Stay: break;
    default: throw std::out_of_range("action out of range");
    }
    return c.is_wall(to) ? from : to;
}

std::vector<double> GridWorld::clean_observation(Cell at) const {
    const int k = config_.window_radius;
    const std::size_t side = config_.window_side(), area = side * side;
    std::vector<double> obs(config_.observation_dim(), 0.0);
    for (int dy = -k; dy <= k; ++dy)
        for (int dx = -k; dx <= k; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const Cell c{at.x + dx, at.y + dy};
            const auto idx = static_cast<std::size_t>((dy + k) * static_cast<int>(side) + (dx + k));
            if (config_.is_wall(c)) {
                obs[idx] = 1.0;
                continue;
            }
            if (config_.is_hazard(c)) obs[area + idx] = 1.0;
            if (c == config_.goal) obs[2 * area + idx] = 1.0;
        }
    return obs;
}

std::vector<double> GridWorld::observe() {
    auto obs = clean_observation(state_.agent);
    if (config_.noise > 0.0) {
        const std::size_t side = config_.window_side(), area = side * side, center = area / 2;
        for (std::size_t i = 0; i < obs.size(); ++i) {
            if (i % area == center) continue;
            if (rng_.bernoulli(config_.noise)) obs[i] = 1.0 - obs[i];
        }
    }
    return obs;
}

std::vector<double> GridWorld::privileged() const {
    std::vector<double> out;
    out.reserve(config_.privileged_dim());
    const Cell a = state_.agent;
    out.push_back(config_.goal.x - a.x);
    out.push_back(config_.goal.y - a.y);
    std::vector<Cell> hz = config_.hazards;
    std::stable_sort(hz.begin(), hz.end(), [&](Cell p, Cell q) { return manhattan(p, a) < manhattan(q, a); });
    for (std::size_t i = 0; i < config_.nearest_hazards; ++i) {
        if (i < hz.size()) {
            out.push_back(hz[i].x - a.x);
            out.push_back(hz[i].y - a.y);
            out.push_back(1.0);
        } else {
            out.insert(out.end(), {0.0, 0.0, 0.0});
        }
    }
    for (int act : state_.last_actions)
        for (int k = 0; k < static_cast<int>(kNumActions); ++k) out.push_back(act == k ? 1.0 : 0.0);
    out.push_back(state_.last_displacement.x);
    out.push_back(state_.last_displacement.y);
    return out;
}

StepResult GridWorld::result(double reward, double cost, bool terminal, bool truncated) {
    StepResult r;
    r.observation = observe();
    r.privileged = privileged();
    r.reward = reward;
    r.cost = cost;
    r.terminal = terminal;
    r.truncated = truncated;
    return r;
}

StepResult GridWorld::reset(std::uint64_t seed) {
    rng_ = Rng(seed);
    const auto starts = config_.start_cells();
    state_ = EnvState{};
    state_.agent = starts[rng_.index(starts.size())];
    state_.done = false;
    log_.clear();
    return result(0.0, 0.0, false, false);
}

StepResult GridWorld::place(Cell cell) {
    if (config_.is_wall(cell)) throw std::invalid_argument("cannot place the agent on a wall");
    state_.agent = cell;
    state_.steps = 0;
    state_.done = false;
    state_.last_actions = {-1, -1, -1};
    state_.last_displacement = {};
    log_.clear();
    return result(0.0, 0.0, false, false);
}

StepResult GridWorld::step(int action) {
    if (state_.done) throw std::logic_error("step called on a finished episode; reset first");
    if (action < 0 || action >= static_cast<int>(kNumActions)) throw std::out_of_range("action out of range");
    const Cell before = state_.agent;
    double reward = 0.0, cost = 0.0;
    bool terminal = false, truncated = false;
    for (int rep = 0; rep < config_.action_repeat; ++rep) {
        const Cell from = state_.agent;
        const Cell to = move(config_, from, action);
        state_.agent = to;
        ++state_.steps;
        reward += config_.shaping * (manhattan(from, config_.goal) - manhattan(to, config_.goal));
        if (config_.is_hazard(to)) cost += 1.0;
        if (to == config_.goal) {
            reward += config_.goal_reward;
            terminal = true;
            break;
        }
        if (state_.steps >= config_.max_steps) {
            truncated = true;
            break;
        }
    }
    for (std::size_t i = kActionHistory - 1; i > 0; --i) state_.last_actions[i] = state_.last_actions[i - 1];
    state_.last_actions[0] = action;
    state_.last_displacement = {state_.agent.x - before.x, state_.agent.y - before.y};
    state_.done = terminal || truncated;
    if (logging_) log_.push_back({state_.steps, action, reward, cost, state_.agent.x, state_.agent.y});
    return result(reward, cost, terminal, truncated);
}

EnvState GridWorld::state() const {
    EnvState s = state_;
    s.rng = rng_.serialize();
    return s;
}

void GridWorld::restore(const EnvState& s) {
    state_ = s;
    rng_.deserialize(s.rng);
}

void GridWorld::write_log_csv(std::ostream& out) const {
    out << "t,a,r,c,x,y\n";
    for (const auto& row : log_)
        out << csv::join_row({std::to_string(row.t), std::to_string(row.action), csv::format_double(row.reward),
                              csv::format_double(row.cost), std::to_string(row.x), std::to_string(row.y)})
            << '\n';
}

} // namespace pig::env
