#include "pig/pomdp/alpha.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <set>
#include <string>

#include "pig/kernels/alpha_kernels.hpp"

namespace pig::pomdp {

AlphaSet AlphaSet::zero(std::size_t dim) {
    AlphaSet out(dim);
    std::vector<double> z(dim, 0.0);
    out.push(z, 0);
    return out;
}

void AlphaSet::push(std::span<const double> values, std::size_t action) {
    if (values.size() != dim_) throw std::invalid_argument("alpha vector has wrong length");
    data_.insert(data_.end(), values.begin(), values.end());
    actions_.push_back(action);
}

void AlphaSet::reserve(std::size_t count) {
    data_.reserve(count * dim_);
    actions_.reserve(count);
}

AlphaVector AlphaSet::get(std::size_t i) const {
    auto v = vector(i);
    return {std::vector<double>(v.begin(), v.end()), actions_[i]};
}

double AlphaSet::value(std::span<const double> b) const {
    std::vector<double> v(1);
    std::vector<std::size_t> k(1);
    evaluate(b, v, k);
    return v[0];
}

std::size_t AlphaSet::argmax(std::span<const double> b) const {
    std::vector<double> v(1);
    std::vector<std::size_t> k(1);
    evaluate(b, v, k);
    return k[0];
}

void AlphaSet::evaluate(std::span<const double> beliefs, std::vector<double>& values,
                        std::vector<std::size_t>& indices) const {
    if (empty()) throw std::logic_error("evaluating an empty alpha set");
    if (beliefs.size() % dim_ != 0) throw std::invalid_argument("belief block has wrong length");
    const std::size_t m = beliefs.size() / dim_;
    values.resize(m);
    indices.resize(m);
    kernels::evaluate_max(data_, beliefs, dim_, values, indices);
}

AlphaSet AlphaSet::subset(std::span<const std::size_t> keep) const {
    AlphaSet out(dim_);
    out.reserve(keep.size());
    for (std::size_t i : keep) out.push(vector(i), actions_[i]);
    return out;
}

BackupTooLarge::BackupTooLarge(std::size_t req, std::size_t c)
    : std::runtime_error("backup would generate " +
                         (req == std::numeric_limits<std::size_t>::max() ? std::string("more than 2^64")
                                                                         : std::to_string(req)) +
                         " vectors, above the cap of " + std::to_string(c)),
      requested(req), cap(c) {}

std::size_t backup_size(std::size_t actions, std::size_t observations, std::size_t prev) {
    constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
    std::size_t total = actions;
    for (std::size_t z = 0; z < observations; ++z) {
        if (prev != 0 && total > kMax / prev) return kMax;
        total *= prev;
    }
    return total;
}

std::vector<double> project(const TabularCPOMDP& m, const AlphaSet& prev) {
    const std::size_t S = m.num_states, A = m.num_actions, Z = m.num_observations, K = prev.size();
    if (prev.dim() != S) throw std::invalid_argument("alpha set dimension differs from state count");
    std::vector<double> g(A * Z * K * S, 0.0);
    for (std::size_t a = 0; a < A; ++a)
        for (std::size_t z = 0; z < Z; ++z)
            for (std::size_t k = 0; k < K; ++k) {
                const auto alpha = prev.vector(k);
                double* out = g.data() + ((a * Z + z) * K + k) * S;
                for (std::size_t s = 0; s < S; ++s) {
                    double acc = 0.0;
                    for (std::size_t next = 0; next < S; ++next)
                        acc += m.P(s, a, next) * m.O(next, a, z) * alpha[next];
                    out[s] = acc;
                }
            }
    return g;
}

namespace {

std::vector<double> base_table(const TabularCPOMDP& m, std::span<const double> payoff) {
    if (payoff.size() != m.num_states * m.num_actions) throw std::invalid_argument("payoff table has wrong size");
    std::vector<double> base(m.num_actions * m.num_states);
    for (std::size_t a = 0; a < m.num_actions; ++a)
        for (std::size_t s = 0; s < m.num_states; ++s) base[a * m.num_states + s] = payoff[s * m.num_actions + a];
    return base;
}

} // namespace

AlphaSet exact_pomdp_backup(const TabularCPOMDP& m, std::span<const double> payoff, const AlphaSet& prev,
                            std::size_t cap) {
    if (prev.empty()) throw std::invalid_argument("previous alpha set is empty");
    const std::size_t count = backup_size(m.num_actions, m.num_observations, prev.size());
    if (count > cap) throw BackupTooLarge(count, cap);
    const auto g = project(m, prev);
    const auto base = base_table(m, payoff);
    const kernels::BackupDims dims{m.num_actions, m.num_observations, prev.size(), m.num_states};
    std::vector<double> data(count * m.num_states);
    std::vector<std::size_t> actions(count);
    kernels::cross_sum(base, g, dims, m.gamma, data, actions);
    AlphaSet out(m.num_states);
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push({data.data() + i * m.num_states, m.num_states}, actions[i]);
    return out;
}

AlphaSet point_backup(const TabularCPOMDP& m, std::span<const double> payoff, const AlphaSet& prev,
                      std::span<const double> beliefs) {
    if (prev.empty()) throw std::invalid_argument("previous alpha set is empty");
    const std::size_t S = m.num_states, K = prev.size(), Z = m.num_observations;
    const auto g = project(m, prev);
    const auto base = base_table(m, payoff);
    const kernels::BackupDims dims{m.num_actions, Z, K, S};
    std::vector<kernels::BackupChoice> choices(beliefs.size() / S);
    kernels::point_backup(base, g, dims, m.gamma, beliefs, choices);

    // distinct choices only, in order of first appearance
    std::set<std::vector<std::size_t>> seen;
    AlphaSet out(S);
    std::vector<double> alpha(S);
    for (const auto& c : choices) {
        std::vector<std::size_t> key{c.action};
        key.insert(key.end(), c.picks.begin(), c.picks.end());
        if (!seen.insert(std::move(key)).second) continue;
        for (std::size_t s = 0; s < S; ++s) alpha[s] = 0.0;
        for (std::size_t z = 0; z < Z; ++z) {
            const double* gz = g.data() + ((c.action * Z + z) * K + c.picks[z]) * S;
            for (std::size_t s = 0; s < S; ++s) alpha[s] += gz[s];
        }
        for (std::size_t s = 0; s < S; ++s) alpha[s] = base[c.action * S + s] + m.gamma * alpha[s];
        out.push(alpha, c.action);
    }
    return out;
}

AlphaSet prune_dominated(const AlphaSet& set) {
    if (set.size() <= 1) return set;
    std::vector<std::uint8_t> flags(set.size());
    kernels::dominated_flags(set.data(), set.dim(), flags);
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < set.size(); ++i)
        if (!flags[i]) keep.push_back(i);
    return set.subset(keep);
}

AlphaSet prune_alpha_set(const AlphaSet& set, std::span<const double> witnesses) {
    if (witnesses.empty()) throw std::invalid_argument("witness set is empty");
    AlphaSet pruned = prune_dominated(set);
    if (pruned.size() <= 1) return pruned;
    std::vector<double> values;
    std::vector<std::size_t> idx;
    pruned.evaluate(witnesses, values, idx);
    std::vector<std::size_t> keep(idx.begin(), idx.end());
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    return pruned.subset(keep);
}

} // namespace pig::pomdp
