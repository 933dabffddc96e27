#include "pig/grad/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace pig::grad {

Adam::Adam(std::vector<Tensor> params, AdamConfig config) : params_(std::move(params)), config_(config) {
    for (const auto& p : params_) {
        m_.emplace_back(p.numel(), 0.0);
        v_.emplace_back(p.numel(), 0.0);
    }
}

StepReport Adam::step() {
    StepReport report;
    double sq = 0.0;
    for (auto& p : params_) {
        if (!p.has_grad()) continue;
        for (double g : p.grad()) sq += g * g;
    }
    report.grad_norm = std::sqrt(sq);
    if (!std::isfinite(report.grad_norm)) {
        ++skipped_;
        return report;
    }
    double factor = 1.0;
    if (config_.clip_norm > 0.0 && report.grad_norm > config_.clip_norm) factor = config_.clip_norm / report.grad_norm;
    report.applied_norm = report.grad_norm * factor;

    ++steps_;
    const double t = static_cast<double>(steps_);
    const double bc1 = 1.0 - std::pow(config_.beta1, t);
    const double bc2 = 1.0 - std::pow(config_.beta2, t);
    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto& p = params_[i];
        if (!p.has_grad()) continue;
        auto g = p.grad();
        auto w = p.mutable_values();
        auto& m = m_[i];
        auto& v = v_[i];
        for (std::size_t k = 0; k < w.size(); ++k) {
            const double gk = g[k] * factor;
            m[k] = config_.beta1 * m[k] + (1.0 - config_.beta1) * gk;
            v[k] = config_.beta2 * v[k] + (1.0 - config_.beta2) * gk * gk;
            const double mhat = m[k] / bc1;
            const double vhat = v[k] / bc2;
            w[k] -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon);
        }
    }
    report.applied = true;
    return report;
}

void Adam::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

std::vector<double> Adam::state() const {
    std::vector<double> flat;
    for (const auto& m : m_) flat.insert(flat.end(), m.begin(), m.end());
    for (const auto& v : v_) flat.insert(flat.end(), v.begin(), v.end());
    return flat;
}

void Adam::load_state(const std::vector<double>& flat, std::uint64_t steps, std::uint64_t skipped) {
    std::size_t total = 0;
    for (const auto& m : m_) total += m.size();
    if (flat.size() != 2 * total) throw std::invalid_argument("adam: state size mismatch");
    std::size_t at = 0;
    for (auto& m : m_)
        for (auto& x : m) x = flat[at++];
    for (auto& v : v_)
        for (auto& x : v) x = flat[at++];
    steps_ = steps;
    skipped_ = skipped;
}

} // namespace pig::grad
