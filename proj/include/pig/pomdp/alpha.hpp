#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "pig/pomdp/model.hpp"

namespace pig::pomdp {

struct AlphaVector {
    std::vector<double> values;
    std::size_t action = 0;
};

// A set of alpha vectors stored contiguously, [count][dim].
class AlphaSet {
public:
    explicit AlphaSet(std::size_t dim = 0) : dim_(dim) {}

    static AlphaSet zero(std::size_t dim);

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return actions_.size(); }
    bool empty() const { return actions_.empty(); }

    void push(std::span<const double> values, std::size_t action);
    void reserve(std::size_t count);

    std::span<const double> vector(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    std::size_t action(std::size_t i) const { return actions_[i]; }
    AlphaVector get(std::size_t i) const;

    std::span<const double> data() const { return data_; }
    const std::vector<std::size_t>& actions() const { return actions_; }

    // max over members of <alpha, b>
    double value(std::span<const double> b) const;
    std::size_t argmax(std::span<const double> b) const;
    // Values and argmax indices at many beliefs ([count][dim] flat).
    void evaluate(std::span<const double> beliefs, std::vector<double>& values,
                  std::vector<std::size_t>& indices) const;

    AlphaSet subset(std::span<const std::size_t> keep) const;

private:
    std::size_t dim_;
    std::vector<double> data_;
    std::vector<std::size_t> actions_;
};

class BackupTooLarge : public std::runtime_error {
public:
    BackupTooLarge(std::size_t requested, std::size_t cap);
    std::size_t requested;
    std::size_t cap;
};

// |A| * |prev|^|Z|, saturating at SIZE_MAX.
std::size_t backup_size(std::size_t actions, std::size_t observations, std::size_t prev);

// g[a][z][k][s] = sum_{s'} P[s][a][s'] O[s'][a][z] alpha_k(s')
std::vector<double> project(const TabularCPOMDP& model, const AlphaSet& prev);

// Full cross-sum backup of `prev` for one payoff channel. Output has exactly
// backup_size(...) members in enumeration order; refuses above `cap`.
AlphaSet exact_pomdp_backup(const TabularCPOMDP& model, std::span<const double> payoff, const AlphaSet& prev,
                            std::size_t cap = 200000);

// Backup restricted to the maximizing vector at each belief. Equal to taking
// the argmax members of the exact backup at those beliefs.
AlphaSet point_backup(const TabularCPOMDP& model, std::span<const double> payoff, const AlphaSet& prev,
                      std::span<const double> beliefs);

// Removes pointwise-dominated members; exact duplicates keep their first copy.
AlphaSet prune_dominated(const AlphaSet& set);

// Dominance pruning followed by argmax retention over the witness beliefs.
AlphaSet prune_alpha_set(const AlphaSet& set, std::span<const double> witnesses);

} // namespace pig::pomdp
