#include "pig/policy/imagination.hpp"

#include <stdexcept>

#include "pig/grad/ops.hpp"

namespace pig::policy {

Actor::Actor(std::size_t feature_dim, std::size_t num_actions, std::size_t hidden, std::uint64_t seed)
    : num_actions_(num_actions) {
    Rng rng(seed);
    net_ = grad::Mlp(feature_dim, {hidden, hidden}, num_actions, rng, params_, "actor", grad::Activation::Elu,
                     grad::Activation::None, 0.1);
}

ImaginedTrajectory twisted_imagination(world::WorldModel& model, const Actor& actor, const Latent& start_minus,
                                       const Latent& start_plus, std::size_t horizon, Rng& rng) {
    if (horizon == 0) throw std::invalid_argument("twisted_imagination: horizon must be >= 1");
    const bool priv = model.config().privileged_model();
    ImaginedTrajectory traj;
    model.params().set_requires_grad(false);
    traj.freeze = std::shared_ptr<void>(&model.params(), [](void* p) {
        static_cast<grad::ParameterSet*>(p)->set_requires_grad(true);
    });
    traj.horizon = horizon;
    traj.rows = start_minus.rows();
    traj.minus.push_back(start_minus);
    if (priv) traj.plus.push_back(start_plus);
    for (std::size_t t = 0; t < horizon; ++t) {
        const auto dist = actor.distribution(traj.minus.back());
        Tensor a = dist.sample(rng);
        traj.actions.push_back(a);
        traj.log_probs.push_back(dist.log_prob(grad::stop_gradient(a)));
        traj.entropies.push_back(dist.entropy());
        traj.minus.push_back(model.naive_imagine(traj.minus.back(), a, rng));
        if (priv) traj.plus.push_back(model.privileged_imagine(traj.plus.back(), a, rng));
        const auto out = model.predict(traj.minus.back(), priv ? traj.plus.back() : Latent{});
        traj.rewards.push_back(out.reward);
        traj.costs.push_back(out.cost);
        traj.continues.push_back(out.cont_logit.defined() ? grad::stop_gradient(grad::sigmoid(out.cont_logit))
                                                          : Tensor::full({traj.rows, 1}, 1.0));
    }
    return traj;
}

} // namespace pig::policy
