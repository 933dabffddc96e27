#include "pig/kernels/gemm.hpp"

#include <atomic>
#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pig::kernels {

namespace {

std::atomic<bool> g_serial_only{false};
constexpr std::size_t kParallelWork = 1u << 15;

inline void row_nn(const double* a, const double* b, double* c, std::size_t i, std::size_t k,
                   std::size_t m, bool accumulate) {
    double* ci = c + i * m;
    if (!accumulate)
        for (std::size_t j = 0; j < m; ++j) ci[j] = 0.0;
    const double* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
        const double aip = ai[p];
        const double* bp = b + p * m;
#pragma omp simd
        for (std::size_t j = 0; j < m; ++j) ci[j] += aip * bp[j];
    }
}

inline void row_nt(const double* a, const double* b, double* c, std::size_t i, std::size_t k,
                   std::size_t m, bool accumulate) {
    const double* ai = a + i * k;
    double* ci = c + i * m;
    // Four outputs at a time; each keeps its own sequential sum over p.
    std::size_t j = 0;
    for (; j + 4 <= m; j += 4) {
        const double* b0 = b + j * k;
        const double* b1 = b0 + k;
        const double* b2 = b1 + k;
        const double* b3 = b2 + k;
        double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
        for (std::size_t p = 0; p < k; ++p) {
            const double x = ai[p];
            s0 += x * b0[p];
            s1 += x * b1[p];
            s2 += x * b2[p];
            s3 += x * b3[p];
        }
        ci[j] = accumulate ? ci[j] + s0 : s0;
        ci[j + 1] = accumulate ? ci[j + 1] + s1 : s1;
        ci[j + 2] = accumulate ? ci[j + 2] + s2 : s2;
        ci[j + 3] = accumulate ? ci[j + 3] + s3 : s3;
    }
    for (; j < m; ++j) {
        const double* bj = b + j * k;
        double acc = 0.0;
        for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
        ci[j] = accumulate ? ci[j] + acc : acc;
    }
}

inline void row_tn(const double* a, const double* b, double* c, std::size_t p, std::size_t n,
                   std::size_t k, std::size_t m, bool accumulate) {
    double* cp = c + p * m;
    if (!accumulate)
        for (std::size_t j = 0; j < m; ++j) cp[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double aip = a[i * k + p];
        if (aip == 0.0) continue;
        const double* bi = b + i * m;
#pragma omp simd
        for (std::size_t j = 0; j < m; ++j) cp[j] += aip * bi[j];
    }
}

bool use_parallel(std::size_t work) {
#ifdef _OPENMP
    return !g_serial_only.load(std::memory_order_relaxed) && work >= kParallelWork &&
           omp_get_max_threads() > 1;
#else
    (void)work;
    return false;
#endif
}

} // namespace

namespace serial {

void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m, bool accumulate) {
    for (std::size_t i = 0; i < n; ++i) row_nn(a.data(), b.data(), c.data(), i, k, m, accumulate);
}

void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m, bool accumulate) {
    for (std::size_t i = 0; i < n; ++i) row_nt(a.data(), b.data(), c.data(), i, k, m, accumulate);
}

void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m, bool accumulate) {
    for (std::size_t p = 0; p < k; ++p)
        row_tn(a.data(), b.data(), c.data(), p, n, k, m, accumulate);
}

} // namespace serial

namespace parallel {

void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m, bool accumulate) {
    const double* ap = a.data();
    const double* bp = b.data();
    double* cp = c.data();
    const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < rows; ++i)
        row_nn(ap, bp, cp, static_cast<std::size_t>(i), k, m, accumulate);
}

void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m, bool accumulate) {
    const double* ap = a.data();
    const double* bp = b.data();
    double* cp = c.data();
    const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < rows; ++i)
        row_nt(ap, bp, cp, static_cast<std::size_t>(i), k, m, accumulate);
}

void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m, bool accumulate) {
    const double* ap = a.data();
    const double* bp = b.data();
    double* cp = c.data();
    const auto rows = static_cast<std::ptrdiff_t>(k);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < rows; ++p)
        row_tn(ap, bp, cp, static_cast<std::size_t>(p), n, k, m, accumulate);
}

} // namespace parallel

void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m, bool accumulate) {
    if (use_parallel(n * k * m) && n > 1)
        parallel::gemm_nn(a, b, c, n, k, m, accumulate);
    else
        serial::gemm_nn(a, b, c, n, k, m, accumulate);
}

void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m, bool accumulate) {
    if (use_parallel(n * k * m) && n > 1)
        parallel::gemm_nt(a, b, c, n, k, m, accumulate);
    else
        serial::gemm_nt(a, b, c, n, k, m, accumulate);
}

void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m, bool accumulate) {
    if (use_parallel(n * k * m) && k > 1)
        parallel::gemm_tn(a, b, c, n, k, m, accumulate);
    else
        serial::gemm_tn(a, b, c, n, k, m, accumulate);
}

bool openmp_available() {
#ifdef _OPENMP
    return true;
#else
    return false;
#endif
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_serial_only(bool serial_only) { g_serial_only.store(serial_only); }
bool serial_only() { return g_serial_only.load(); }

} // namespace pig::kernels
