#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace pig::policy {

struct PenaltyStep {
    double psi = 0.0;         // penalty value
    double next_lambda = 0.0; // multiplier after the update
    double slope = 0.0;       // d psi / d delta
};

// Piecewise augmented-Lagrangian rule:
//   lambda + mu*delta >= 0: psi = lambda*delta + mu/2*delta^2, lambda' = lambda + mu*delta
//   otherwise:              psi = -lambda^2 / (2 mu),           lambda' = 0
// Throws std::invalid_argument for mu <= 0 or lambda < 0.
PenaltyStep augmented_lagrangian(double delta, double lambda, double mu);

struct PidState {
    double kp = 0.01, ki = 0.1, kd = 0.01;
    double bound = 0.75;
    double integral = 0.0;
    double prev_error = 0.0;
    bool has_prev = false;
};

// I <- max(0, I + delta); lambda = clamp(kp*delta + ki*I + kd*(delta - prev), 0, bound).
// The derivative term is zero on the first call.
double pid_lagrangian(double delta, PidState& state);

enum class ConstraintMode { Augmented, Pid };

struct LagrangeConfig {
    ConstraintMode mode = ConstraintMode::Augmented;
    double lambda0 = 0.01;
    double mu0 = 1e-6;
    double nu = 5e-9; // mu_{k+1} = mu_k * (1 + nu)
    PidState pid;
    bool measured_cost = false; // drive updates with environment episode costs
};

void to_json(nlohmann::json& j, const LagrangeConfig& c);
void from_json(const nlohmann::json& j, LagrangeConfig& c);

class Lagrange {
public:
    Lagrange() : Lagrange(LagrangeConfig{}) {}
    explicit Lagrange(const LagrangeConfig& config);

    const LagrangeConfig& config() const { return config_; }
    double multiplier() const { return lambda_; }
    double mu() const { return mu_; }
    const PidState& pid() const { return pid_; }
    std::uint64_t updates() const { return updates_; }

    // Penalty value and its slope at the current state.
    double penalty(double delta) const;
    double slope(double delta) const;
    // One multiplier update, followed by the mu schedule.
    void update(double delta);

    void set_state(double lambda, double mu, const PidState& pid, std::uint64_t updates);

private:
    LagrangeConfig config_;
    double lambda_, mu_;
    PidState pid_;
    std::uint64_t updates_ = 0;
};

} // namespace pig::policy
