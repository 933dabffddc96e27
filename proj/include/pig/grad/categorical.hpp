#pragma once

#include <cstddef>

#include "pig/grad/ops.hpp"
#include "pig/grad/tensor.hpp"

namespace pig::grad {

// Product of independent categoricals. Logits are stored as [batch, groups*classes];
// a plain [groups, classes] tensor is accepted and treated as a batch of one.
class CategoricalDistribution {
public:
    CategoricalDistribution(Tensor logits, std::size_t groups, std::size_t classes);

    const Tensor& logits() const { return logits_; }
    std::size_t groups() const { return groups_; }
    std::size_t classes() const { return classes_; }
    std::size_t batch() const { return logits_.rows(); }

    Tensor probs() const { return softmax(logits_, groups_); }
    Tensor log_probs() const { return log_softmax(logits_, groups_); }
    // [batch, 1], summed over groups
    Tensor entropy() const;
    Tensor sample(Rng& rng) const { return straight_through_onehot(logits_, groups_, rng); }
    Tensor mode() const { return straight_through_mode(logits_, groups_); }
    // log-probability of a one-hot assignment, [batch, 1]
    Tensor log_prob(const Tensor& onehot) const;

    CategoricalDistribution detached() const;

private:
    Tensor logits_;
    std::size_t groups_;
    std::size_t classes_;
};

// KL[q || p] in nats, summed over groups: shape [batch, 1].
Tensor kl_categorical(const CategoricalDistribution& q, const CategoricalDistribution& p);

} // namespace pig::grad
