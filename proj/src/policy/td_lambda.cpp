#include "pig/policy/td_lambda.hpp"

#include <stdexcept>

#include "pig/grad/ops.hpp"

namespace pig::policy {

std::vector<double> td_lambda(std::span<const double> values, std::span<const double> signals, double gamma,
                              double lambda) {
    if (values.empty()) throw std::invalid_argument("td_lambda: length must be >= 1");
    if (values.size() != signals.size()) throw std::invalid_argument("td_lambda: length mismatch");
    if (!(gamma >= 0.0 && gamma <= 1.0) || !(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("td_lambda: gamma and lambda must lie in [0, 1]");
    const std::size_t H = values.size();
    std::vector<double> X(H);
    X[H - 1] = values[H - 1];
    for (std::size_t t = H - 1; t-- > 0;)
        X[t] = signals[t] + gamma * ((1.0 - lambda) * values[t + 1] + lambda * X[t + 1]);
    return X;
}

std::vector<grad::Tensor> td_lambda(const std::vector<grad::Tensor>& values,
                                    const std::vector<grad::Tensor>& signals,
                                    const std::vector<grad::Tensor>& discounts, double lambda) {
    const std::size_t H = signals.size();
    if (H == 0 || values.size() != H + 1 || discounts.size() != H)
        throw std::invalid_argument("td_lambda: expected H signals, H discounts and H+1 values");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("td_lambda: lambda must lie in [0, 1]");
    using grad::Tensor;
    std::vector<Tensor> X(H);
    Tensor next = values[H];
    for (std::size_t t = H; t-- > 0;) {
        Tensor mix = (1.0 - lambda) * values[t + 1] + lambda * next;
        X[t] = signals[t] + discounts[t] * mix;
        next = X[t];
    }
    return X;
}

} // namespace pig::policy
