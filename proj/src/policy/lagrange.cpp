#include "pig/policy/lagrange.hpp"

#include <algorithm>
#include <stdexcept>

namespace pig::policy {

PenaltyStep augmented_lagrangian(double delta, double lambda, double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("augmented_lagrangian: mu must be > 0");
    if (!(lambda >= 0.0)) throw std::invalid_argument("augmented_lagrangian: lambda must be >= 0");
    const double shifted = lambda + mu * delta;
    if (shifted >= 0.0) return {lambda * delta + 0.5 * mu * delta * delta, shifted, shifted};
    return {-lambda * lambda / (2.0 * mu), 0.0, 0.0};
}

double pid_lagrangian(double delta, PidState& s) {
    s.integral = std::max(0.0, s.integral + delta);
    const double derivative = s.has_prev ? delta - s.prev_error : 0.0;
    s.prev_error = delta;
    s.has_prev = true;
    return std::clamp(s.kp * delta + s.ki * s.integral + s.kd * derivative, 0.0, s.bound);
}

void to_json(nlohmann::json& j, const LagrangeConfig& c) {
    j = {{"mode", c.mode == ConstraintMode::Augmented ? "augmented" : "pid"},
         {"lambda0", c.lambda0},
         {"mu0", c.mu0},
         {"nu", c.nu},
         {"kp", c.pid.kp},
         {"ki", c.pid.ki},
         {"kd", c.pid.kd},
         {"bound", c.pid.bound},
         {"measured_cost", c.measured_cost}};
}

void from_json(const nlohmann::json& j, LagrangeConfig& c) {
    if (j.contains("mode")) {
        const auto m = j.at("mode").get<std::string>();
        if (m == "augmented") c.mode = ConstraintMode::Augmented;
        else if (m == "pid") c.mode = ConstraintMode::Pid;
        else throw std::invalid_argument("constraint mode must be augmented or pid");
    }
    auto get = [&](const char* key, double& field) {
        if (j.contains(key)) field = j.at(key).get<double>();
    };
    get("lambda0", c.lambda0);
    get("mu0", c.mu0);
    get("nu", c.nu);
    get("kp", c.pid.kp);
    get("ki", c.pid.ki);
    get("kd", c.pid.kd);
    get("bound", c.pid.bound);
    if (j.contains("measured_cost")) c.measured_cost = j.at("measured_cost").get<bool>();
    if (!(c.mu0 > 0.0)) throw std::invalid_argument("mu0 must be > 0");
    if (c.lambda0 < 0.0 || c.nu < 0.0 || c.pid.bound < 0.0) throw std::invalid_argument("lambda0, nu, bound must be >= 0");
}

Lagrange::Lagrange(const LagrangeConfig& config)
    : config_(config), lambda_(config.lambda0), mu_(config.mu0), pid_(config.pid) {
    if (!(mu_ > 0.0)) throw std::invalid_argument("mu0 must be > 0");
    if (config_.mode == ConstraintMode::Pid) lambda_ = std::clamp(lambda_, 0.0, pid_.bound);
}

double Lagrange::penalty(double delta) const {
    if (config_.mode == ConstraintMode::Pid) return lambda_ * delta;
    return augmented_lagrangian(delta, lambda_, mu_).psi;
}

double Lagrange::slope(double delta) const {
    if (config_.mode == ConstraintMode::Pid) return lambda_;
    return augmented_lagrangian(delta, lambda_, mu_).slope;
}

void Lagrange::update(double delta) {
    if (config_.mode == ConstraintMode::Pid) {
        lambda_ = pid_lagrangian(delta, pid_);
    } else {
        lambda_ = augmented_lagrangian(delta, lambda_, mu_).next_lambda;
        mu_ *= 1.0 + config_.nu;
    }
    ++updates_;
}

void Lagrange::set_state(double lambda, double mu, const PidState& pid, std::uint64_t updates) {
    lambda_ = lambda;
    mu_ = mu;
    pid_ = pid;
    updates_ = updates;
}

} // namespace pig::policy
