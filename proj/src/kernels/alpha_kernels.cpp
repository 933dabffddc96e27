#include "pig/kernels/alpha_kernels.hpp"

#include <limits>

#include "pig/kernels/gemm.hpp"

namespace pig::kernels {

namespace {

inline double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

inline void max_one(const double* alphas, std::size_t count, const double* belief, std::size_t dim, double& value,
                    std::size_t& index) {
    value = -std::numeric_limits<double>::infinity();
    index = 0;
    for (std::size_t k = 0; k < count; ++k) {
        const double v = dot(alphas + k * dim, belief, dim);
        if (v > value) {
            value = v;
            index = k;
        }
    }
}

inline void cross_sum_one(const double* base, const double* proj, const BackupDims& d, double gamma,
                          std::size_t out_index, double* out, std::size_t& out_action) {
    std::size_t per_action = 1;
    for (std::size_t z = 0; z < d.observations; ++z) per_action *= d.prev;
    const std::size_t a = out_index / per_action;
    std::size_t rest = out_index % per_action;
    const double* ba = base + a * d.dim;
    for (std::size_t s = 0; s < d.dim; ++s) out[s] = 0.0;
    // digit z selects the predecessor used for observation z (z = 0 least significant)
    for (std::size_t z = 0; z < d.observations; ++z) {
        const std::size_t k = rest % d.prev;
        rest /= d.prev;
        const double* g = proj + ((a * d.observations + z) * d.prev + k) * d.dim;
        for (std::size_t s = 0; s < d.dim; ++s) out[s] += g[s];
    }
    for (std::size_t s = 0; s < d.dim; ++s) out[s] = ba[s] + gamma * out[s];
    out_action = a;
}

inline void point_one(const double* base, const double* proj, const BackupDims& d, double gamma,
                      const double* belief, BackupChoice& choice) {
    double best = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> picks(d.observations);
    for (std::size_t a = 0; a < d.actions; ++a) {
        double total = 0.0;
        for (std::size_t z = 0; z < d.observations; ++z) {
            double v;
            std::size_t k;
            max_one(proj + (a * d.observations + z) * d.prev * d.dim, d.prev, belief, d.dim, v, k);
            picks[z] = k;
            total += v;
        }
        const double value = dot(base + a * d.dim, belief, d.dim) + gamma * total;
        if (value > best) {
            best = value;
            choice.action = a;
            choice.picks = picks;
        }
    }
}

// i is dominated if some j is pointwise >= and either differs somewhere or
// precedes it (exact duplicates keep their first occurrence)
inline bool dominated_one(const double* alphas, std::size_t count, std::size_t dim, std::size_t i) {
    const double* ai = alphas + i * dim;
    for (std::size_t j = 0; j < count; ++j) {
        if (j == i) continue;
        const double* aj = alphas + j * dim;
        bool ge = true, strict = false;
        for (std::size_t s = 0; s < dim; ++s) {
            if (aj[s] < ai[s]) {
                ge = false;
                break;
            }
            if (aj[s] > ai[s]) strict = true;
        }
        if (ge && (strict || j < i)) return true;
    }
    return false;
}

bool parallel_on(std::size_t work) { return !serial_only() && work >= 4096 && max_threads() > 1; }

} // namespace

namespace serial {

void evaluate_max(std::span<const double> alphas, std::span<const double> beliefs, std::size_t dim,
                  std::span<double> best_value, std::span<std::size_t> best_index) {
    const std::size_t count = alphas.size() / dim, m = beliefs.size() / dim;
    for (std::size_t b = 0; b < m; ++b)
        max_one(alphas.data(), count, beliefs.data() + b * dim, dim, best_value[b], best_index[b]);
}

void cross_sum(std::span<const double> base, std::span<const double> projections, const BackupDims& dims,
               double gamma, std::span<double> out, std::span<std::size_t> out_actions) {
    const std::size_t total = out_actions.size();
    for (std::size_t i = 0; i < total; ++i)
        cross_sum_one(base.data(), projections.data(), dims, gamma, i, out.data() + i * dims.dim, out_actions[i]);
}

void point_backup(std::span<const double> base, std::span<const double> projections, const BackupDims& dims,
                  double gamma, std::span<const double> beliefs, std::span<BackupChoice> choices) {
    for (std::size_t b = 0; b < choices.size(); ++b)
        point_one(base.data(), projections.data(), dims, gamma, beliefs.data() + b * dims.dim, choices[b]);
}

void dominated_flags(std::span<const double> alphas, std::size_t dim, std::span<std::uint8_t> flags) {
    const std::size_t count = flags.size();
    for (std::size_t i = 0; i < count; ++i) flags[i] = dominated_one(alphas.data(), count, dim, i) ? 1 : 0;
}

} // namespace serial

namespace parallel {

void evaluate_max(std::span<const double> alphas, std::span<const double> beliefs, std::size_t dim,
                  std::span<double> best_value, std::span<std::size_t> best_index) {
    const std::size_t count = alphas.size() / dim;
    const auto m = static_cast<std::ptrdiff_t>(beliefs.size() / dim);
    const double* ap = alphas.data();
    const double* bp = beliefs.data();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < m; ++b) {
        const auto i = static_cast<std::size_t>(b);
        max_one(ap, count, bp + i * dim, dim, best_value[i], best_index[i]);
    }
}

void cross_sum(std::span<const double> base, std::span<const double> projections, const BackupDims& dims,
               double gamma, std::span<double> out, std::span<std::size_t> out_actions) {
    const auto total = static_cast<std::ptrdiff_t>(out_actions.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < total; ++i) {
        const auto k = static_cast<std::size_t>(i);
        cross_sum_one(base.data(), projections.data(), dims, gamma, k, out.data() + k * dims.dim, out_actions[k]);
    }
}

void point_backup(std::span<const double> base, std::span<const double> projections, const BackupDims& dims,
                  double gamma, std::span<const double> beliefs, std::span<BackupChoice> choices) {
    const auto m = static_cast<std::ptrdiff_t>(choices.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t b = 0; b < m; ++b) {
        const auto i = static_cast<std::size_t>(b);
        point_one(base.data(), projections.data(), dims, gamma, beliefs.data() + i * dims.dim, choices[i]);
    }
}

void dominated_flags(std::span<const double> alphas, std::size_t dim, std::span<std::uint8_t> flags) {
    const std::size_t count = flags.size();
    const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        flags[k] = dominated_one(alphas.data(), count, dim, k) ? 1 : 0;
    }
}

} // namespace parallel

void evaluate_max(std::span<const double> alphas, std::span<const double> beliefs, std::size_t dim,
                  std::span<double> best_value, std::span<std::size_t> best_index) {
    if (parallel_on(alphas.size() / dim * beliefs.size() / dim))
        parallel::evaluate_max(alphas, beliefs, dim, best_value, best_index);
    else
        serial::evaluate_max(alphas, beliefs, dim, best_value, best_index);
}

void cross_sum(std::span<const double> base, std::span<const double> projections, const BackupDims& dims,
               double gamma, std::span<double> out, std::span<std::size_t> out_actions) {
    if (parallel_on(out_actions.size()))
        parallel::cross_sum(base, projections, dims, gamma, out, out_actions);
    else
        serial::cross_sum(base, projections, dims, gamma, out, out_actions);
}

void point_backup(std::span<const double> base, std::span<const double> projections, const BackupDims& dims,
                  double gamma, std::span<const double> beliefs, std::span<BackupChoice> choices) {
    if (parallel_on(choices.size() * dims.prev * dims.actions * dims.observations))
        parallel::point_backup(base, projections, dims, gamma, beliefs, choices);
    else
        serial::point_backup(base, projections, dims, gamma, beliefs, choices);
}

void dominated_flags(std::span<const double> alphas, std::size_t dim, std::span<std::uint8_t> flags) {
    if (parallel_on(flags.size() * flags.size()))
        parallel::dominated_flags(alphas, dim, flags);
    else
        serial::dominated_flags(alphas, dim, flags);
}

} // namespace pig::kernels
