#pragma once

#include <cstddef>
#include <span>

// Dense row-major matrix products used by the autodiff engine.
//
// Every kernel exists twice: a serial reference and an OpenMP version that
// splits work over output rows. Each output element is accumulated in the same
// order in both, so the two produce bit-identical results for any thread count.
namespace pig::kernels {

namespace serial {
// c[n,m] (+)= a[n,k] * b[k,m]
void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m, bool accumulate);
// c[n,m] (+)= a[n,k] * b[m,k]^T
void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m, bool accumulate);
// c[k,m] (+)= a[n,k]^T * b[n,m]
void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m, bool accumulate);
} // namespace serial

namespace parallel {
void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m, bool accumulate);
void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m, bool accumulate);
void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m, bool accumulate);
} // namespace parallel

// Dispatching entry points: parallel when OpenMP is available, more than one
// thread is configured and the product is large enough to amortize a fork.
void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m, bool accumulate = false);
void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m, bool accumulate = false);
void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m, bool accumulate = false);

bool openmp_available();
int max_threads();
// Forces the serial path regardless of size; used by determinism checks and
// single-thread runs.
void set_serial_only(bool serial_only);
bool serial_only();

} // namespace pig::kernels
