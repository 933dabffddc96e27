#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pig/grad/tensor.hpp"

namespace pig::grad {

struct AdamConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    // Global-norm clipping threshold; 0 disables.
    double clip_norm = 40.0;
};

struct StepReport {
    bool applied = false;
    double grad_norm = 0.0;
    double applied_norm = 0.0;
};

class Adam {
public:
    Adam() = default;
    Adam(std::vector<Tensor> params, AdamConfig config);

    // Consumes the gradients currently in the parameter buffers. A non-finite
    // gradient skips the update entirely and bumps the incident counter.
    StepReport step();
    void zero_grad();

    const AdamConfig& config() const { return config_; }
    std::uint64_t steps() const { return steps_; }
    std::uint64_t skipped() const { return skipped_; }

    // Flat optimizer state for checkpoints: [m..., v...].
    std::vector<double> state() const;
    void load_state(const std::vector<double>& flat, std::uint64_t steps, std::uint64_t skipped);

private:
    std::vector<Tensor> params_;
    AdamConfig config_;
    std::vector<std::vector<double>> m_, v_;
    std::uint64_t steps_ = 0;
    std::uint64_t skipped_ = 0;
};

} // namespace pig::grad
