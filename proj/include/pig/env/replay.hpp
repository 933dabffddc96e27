#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "pig/util/rng.hpp"

namespace pig::env {

// One stored step in the usual latent-model layout: the observation reached,
// the action that led to it (none at an episode start), and the reward, cost
// and termination that came with it.
struct Transition {
    std::vector<double> observation;
    std::vector<double> privileged;
    int prev_action = -1;
    double reward = 0.0;
    double cost = 0.0;
    bool is_first = false;
    bool is_terminal = false;
};

// Time-major batch: field[t][b][...] flattened.
struct SequenceBatch {
    std::size_t batch = 0, length = 0;
    std::size_t obs_dim = 0, priv_dim = 0, num_actions = 0;
    std::vector<double> observation; // [T][B][obs_dim]
    std::vector<double> privileged;  // [T][B][priv_dim]
    std::vector<double> prev_action; // [T][B][num_actions] one-hot, zeros when none
    std::vector<double> reward;      // [T][B]
    std::vector<double> cost;        // [T][B]
    std::vector<double> is_first;    // [T][B]
    std::vector<double> is_terminal; // [T][B]
    std::vector<std::size_t> starts; // logical start index of each sequence
};

// Ring buffer over a flat stream of steps appended in episode order. Sampled
// windows may span an episode join; the is_first flag marks every such join.
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, std::size_t obs_dim, std::size_t priv_dim, std::size_t num_actions);

    void add(const Transition& step);

    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    std::size_t total_added() const { return total_added_; }

    // Logical index 0 is the oldest stored step.
    Transition at(std::size_t index) const;

    // Uniform over all windows of length T inside the stored data; nullopt
    // when fewer than T steps are stored.
    std::optional<SequenceBatch> sample(std::size_t B, std::size_t T, Rng& rng) const;

    void save(std::ostream& out) const;
    void load(std::istream& in);

    bool operator==(const ReplayBuffer& other) const;

private:
    std::size_t physical(std::size_t logical) const { return (head_ + logical) % capacity_; }
    void write_step(std::size_t slot, std::size_t t, std::size_t b, SequenceBatch& out) const;

    std::size_t capacity_, obs_dim_, priv_dim_, num_actions_;
    std::size_t head_ = 0, size_ = 0, total_added_ = 0;
    std::vector<double> obs_, priv_, reward_, cost_;
    std::vector<int> action_;
    std::vector<std::uint8_t> first_, terminal_;
};

} // namespace pig::env
