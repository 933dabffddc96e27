#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

// Inner loops of belief-space value iteration, with a serial reference and an
// OpenMP variant of each. Parallel versions split over independent outputs
// (beliefs, generated vectors, candidates) and never reduce across threads, so
// they match the serial results bit for bit.
//
// Layout conventions (row-major, `dim` = number of states):
//   alphas       [count][dim]
//   beliefs      [count][dim]
//   projections  [actions][observations][prev][dim]
//   base         [actions][dim]   per-step payoff of each action
namespace pig::kernels {

struct BackupDims {
    std::size_t actions = 0;
    std::size_t observations = 0;
    std::size_t prev = 0;
    std::size_t dim = 0;
};

// Choice made by a point backup: an action and one predecessor index per observation.
struct BackupChoice {
    std::size_t action = 0;
    std::vector<std::size_t> picks;
};

namespace serial {
void evaluate_max(std::span<const double> alphas, std::span<const double> beliefs, std::size_t dim,
                  std::span<double> best_value, std::span<std::size_t> best_index);
void cross_sum(std::span<const double> base, std::span<const double> projections, const BackupDims& dims,
               double gamma, std::span<double> out, std::span<std::size_t> out_actions);
void point_backup(std::span<const double> base, std::span<const double> projections, const BackupDims& dims,
                  double gamma, std::span<const double> beliefs, std::span<BackupChoice> choices);
void dominated_flags(std::span<const double> alphas, std::size_t dim, std::span<std::uint8_t> flags);
} // namespace serial

namespace parallel {
void evaluate_max(std::span<const double> alphas, std::span<const double> beliefs, std::size_t dim,
                  std::span<double> best_value, std::span<std::size_t> best_index);
void cross_sum(std::span<const double> base, std::span<const double> projections, const BackupDims& dims,
               double gamma, std::span<double> out, std::span<std::size_t> out_actions);
void point_backup(std::span<const double> base, std::span<const double> projections, const BackupDims& dims,
                  double gamma, std::span<const double> beliefs, std::span<BackupChoice> choices);
void dominated_flags(std::span<const double> alphas, std::size_t dim, std::span<std::uint8_t> flags);
} // namespace parallel

// Dispatch to the parallel variant when OpenMP is on and serial mode is not forced.
void evaluate_max(std::span<const double> alphas, std::span<const double> beliefs, std::size_t dim,
                  std::span<double> best_value, std::span<std::size_t> best_index);
void cross_sum(std::span<const double> base, std::span<const double> projections, const BackupDims& dims,
               double gamma, std::span<double> out, std::span<std::size_t> out_actions);
void point_backup(std::span<const double> base, std::span<const double> projections, const BackupDims& dims,
                  double gamma, std::span<const double> beliefs, std::span<BackupChoice> choices);
void dominated_flags(std::span<const double> alphas, std::size_t dim, std::span<std::uint8_t> flags);

} // namespace pig::kernels
