#include "pig/grad/categorical.hpp"

namespace pig::grad {

CategoricalDistribution::CategoricalDistribution(Tensor logits, std::size_t groups, std::size_t classes)
    : groups_(groups), classes_(classes) {
    const std::size_t width = groups * classes;
    if (width == 0 || logits.numel() % width != 0)
        throw ShapeError("categorical: logits " + shape_str(logits.shape()) + " do not split into " +
                         std::to_string(groups) + "x" + std::to_string(classes));
    if (logits.cols() == width)
        logits_ = std::move(logits);
    else
        logits_ = reshape(logits, Shape{logits.numel() / width, width});
}

Tensor CategoricalDistribution::entropy() const {
    return scale(sum_cols(mul(probs(), log_probs())), -1.0);
}

Tensor CategoricalDistribution::log_prob(const Tensor& onehot) const {
    return sum_cols(mul(log_probs(), onehot));
}

CategoricalDistribution CategoricalDistribution::detached() const {
    return {stop_gradient(logits_), groups_, classes_};
}

Tensor kl_categorical(const CategoricalDistribution& q, const CategoricalDistribution& p) {
    if (q.groups() != p.groups() || q.classes() != p.classes() || q.batch() != p.batch())
        throw ShapeError("kl_categorical: shape mismatch " + shape_str(q.logits().shape()) + " vs " +
                         shape_str(p.logits().shape()));
    auto log_q = q.log_probs();
    auto log_p = p.log_probs();
    return sum_cols(mul(q.probs(), sub(log_q, log_p)));
}

} // namespace pig::grad
