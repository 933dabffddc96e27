#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "pig/grad/categorical.hpp"
#include "pig/grad/nn.hpp"
#include "pig/util/rng.hpp"
#include "pig/world/world_model.hpp"

namespace pig::policy {

using grad::Tensor;
using world::Latent;

// Categorical policy over s- features.
class Actor {
public:
    Actor() = default;
    Actor(std::size_t feature_dim, std::size_t num_actions, std::size_t hidden, std::uint64_t seed);

    Tensor logits(const Latent& minus) const { return net_(minus.features()); }
    grad::CategoricalDistribution distribution(const Latent& minus) const {
        return grad::CategoricalDistribution(logits(minus), 1, num_actions_);
    }
    std::size_t num_actions() const { return num_actions_; }
    grad::ParameterSet& params() { return params_; }
    const grad::ParameterSet& params() const { return params_; }

private:
    std::size_t num_actions_ = 0;
    grad::ParameterSet params_;
    grad::Mlp net_;
};

// States s_0..s_H (index 0 is the start), actions a_0..a_{H-1}, and for
// each transition t the predicted reward, cost and continuation at s_{t+1}.
struct ImaginedTrajectory {
    std::size_t horizon = 0, rows = 0;
    std::vector<Latent> minus, plus;
    std::vector<Tensor> actions;    // one-hot [rows, A], straight-through
    std::vector<Tensor> log_probs;  // log pi(a_t | s-_t), [rows, 1]
    std::vector<Tensor> entropies;  // [rows, 1]
    std::vector<Tensor> rewards, costs;
    std::vector<Tensor> continues;  // probability in [0, 1], no gradient
    // Keeps the world-model parameters frozen while the trajectory is alive.
    std::shared_ptr<void> freeze;
};

// Synchronized rollout: the actor samples from s- only and both latent
// streams advance on that action. World-model parameters stay frozen until
// the trajectory is destroyed, so a backward pass through it reaches only
// the actor and whatever the caller attaches downstream. `start_plus` is
// ignored without a privileged model.
ImaginedTrajectory twisted_imagination(world::WorldModel& model, const Actor& actor, const Latent& start_minus,
                                       const Latent& start_plus, std::size_t horizon, Rng& rng);

} // namespace pig::policy
