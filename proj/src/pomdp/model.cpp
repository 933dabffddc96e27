#include "pig/pomdp/model.hpp"

#include <cmath>
#include <sstream>

namespace pig::pomdp {

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument("TabularCPOMDP: " + what); }

void check_rows(const std::vector<double>& table, std::size_t rows, std::size_t width, const char* name,
                double tolerance) {
    if (table.size() != rows * width) {
        std::ostringstream os;
        os << name << " has " << table.size() << " entries, expected " << rows * width;
        fail(os.str());
    }
    for (std::size_t r = 0; r < rows; ++r) {
        double total = 0.0;
        for (std::size_t c = 0; c < width; ++c) {
            const double v = table[r * width + c];
            if (!(v >= 0.0) || !std::isfinite(v)) {
                std::ostringstream os;
                os << name << " row " << r << " has invalid entry " << v;
                fail(os.str());
            }
            total += v;
        }
        if (std::abs(total - 1.0) > tolerance) {
            std::ostringstream os;
            os.precision(17);
            os << name << " row " << r << " sums to " << total;
            fail(os.str());
        }
    }
}

} // namespace

std::span<const double> TabularCPOMDP::channel(std::size_t index) const {
    if (index == 0) return reward;
    if (index - 1 >= costs.size()) throw std::out_of_range("channel index out of range");
    return costs[index - 1];
}

std::string TabularCPOMDP::channel_name(std::size_t index) const {
    return index == 0 ? std::string("reward") : "cost" + std::to_string(index - 1);
}

void TabularCPOMDP::validate(double tolerance) const {
    if (num_states == 0 || num_actions == 0 || num_observations == 0) fail("empty state, action or observation set");
    if (!(gamma > 0.0 && gamma <= 1.0)) fail("gamma must lie in (0, 1]");
    check_rows(transition, num_states * num_actions, num_states, "P", tolerance);
    check_rows(observation, num_states * num_actions, num_observations, "O", tolerance);
    if (reward.size() != num_states * num_actions) fail("R has wrong size");
    for (double r : reward)
        if (!std::isfinite(r)) fail("R has a non-finite entry");
    if (budgets.size() != costs.size()) fail("budgets and costs differ in count");
    for (const auto& c : costs) {
        if (c.size() != num_states * num_actions) fail("C has wrong size");
        for (double v : c)
            if (!std::isfinite(v)) fail("C has a non-finite entry");
    }
    for (double b : budgets)
        if (!(b >= 0.0)) fail("budgets must be nonnegative");
    try {
        validate_belief(initial_belief, num_states, tolerance);
    } catch (const std::invalid_argument& e) {
        fail(std::string("b0: ") + e.what());
    }
}

void validate_belief(std::span<const double> b, std::size_t num_states, double tolerance) {
    if (b.size() != num_states) throw std::invalid_argument("belief has wrong length");
    double total = 0.0;
    for (double v : b) {
        if (!(v >= 0.0)) throw std::invalid_argument("belief has a negative or NaN entry");
        total += v;
    }
    if (std::abs(total - 1.0) > tolerance) throw std::invalid_argument("belief does not sum to 1");
}

double observation_probability(const TabularCPOMDP& m, std::span<const double> b, std::size_t a, std::size_t z) {
    double total = 0.0;
    for (std::size_t next = 0; next < m.num_states; ++next) {
        double reach = 0.0;
        for (std::size_t s = 0; s < m.num_states; ++s) reach += m.P(s, a, next) * b[s];
        total += m.O(next, a, z) * reach;
    }
    return total;
}

Belief belief_update(const TabularCPOMDP& m, std::span<const double> b, std::size_t a, std::size_t z) {
    if (b.size() != m.num_states) throw std::invalid_argument("belief has wrong length");
    if (a >= m.num_actions || z >= m.num_observations) throw std::out_of_range("action or observation out of range");
    Belief out(m.num_states, 0.0);
    double total = 0.0;
    for (std::size_t next = 0; next < m.num_states; ++next) {
        double reach = 0.0;
        for (std::size_t s = 0; s < m.num_states; ++s) reach += m.P(s, a, next) * b[s];
        out[next] = m.O(next, a, z) * reach;
        total += out[next];
    }
    if (!(total > 0.0)) throw ImpossibleObservation("observation has zero probability under the belief");
    for (double& v : out) v /= total;
    return out;
}

TabularCPOMDP make_fully_observable(const TabularCPOMDP& model) {
    TabularCPOMDP m = model;
    m.num_observations = m.num_states;
    m.observation.assign(m.num_states * m.num_actions * m.num_states, 0.0);
    for (std::size_t next = 0; next < m.num_states; ++next)
        for (std::size_t a = 0; a < m.num_actions; ++a)
            m.observation[(next * m.num_actions + a) * m.num_states + next] = 1.0;
    return m;
}

TabularCPOMDP make_blind(const TabularCPOMDP& model) {
    TabularCPOMDP m = model;
    m.num_observations = 1;
    m.observation.assign(m.num_states * m.num_actions, 1.0);
    return m;
}

} // namespace pig::pomdp
