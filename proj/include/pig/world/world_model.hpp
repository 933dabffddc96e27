#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pig/env/replay.hpp"
#include "pig/grad/categorical.hpp"
#include "pig/grad/nn.hpp"
#include "pig/grad/optim.hpp"
#include "pig/util/rng.hpp"

namespace pig::world {

using grad::Tensor;

enum class Ablation { Full, NoAlign, Unprivileged, Informed };
enum class PredictorInputs { StarPlus, StarMinus };

std::string to_string(Ablation a);
Ablation ablation_from_string(const std::string& name); // throws std::invalid_argument

struct WorldModelConfig {
    std::size_t obs_dim = 27;
    std::size_t priv_dim = 25;
    std::size_t num_actions = 5;
    std::size_t deter = 128;
    std::size_t groups = 8;
    std::size_t classes = 8;
    std::size_t embed = 64;
    std::size_t hidden = 128;
    double alpha = 0.1; // weight of KL[q || sg(p)]
    double beta = 0.5;  // weight of KL[sg(q) || p]
    double free_bits = 1.0;
    bool free_bits_enabled = true;
    double obs_weight = 1.0;  // decoder: observation bits
    double priv_weight = 1.0; // decoder: privileged vector
    double pred_weight = 1.0;
    bool predict_continuation = true;
    PredictorInputs predictor_inputs = PredictorInputs::StarPlus;
    bool detach_zplus_in_oracle = false;
    Ablation ablation = Ablation::Full;
    grad::AdamConfig optimizer{1e-4, 0.9, 0.999, 1e-8, 40.0};

    std::size_t stoch() const { return groups * classes; }
    std::size_t feature_dim() const { return deter + stoch(); }
    bool privileged_model() const { return ablation == Ablation::Full || ablation == Ablation::NoAlign; }
    bool align() const { return ablation == Ablation::Full; }
};

void to_json(nlohmann::json& j, const WorldModelConfig& c);
void from_json(const nlohmann::json& j, WorldModelConfig& c);

// Reads of privileged quantities, split by consumer.
struct AccessCounters {
    std::uint64_t privileged_inputs = 0; // rows of i_t fed to an encoder
    std::uint64_t privileged_model = 0;  // privileged dynamics / posterior evaluations
    std::uint64_t oracle_posterior = 0;  // oracle posterior evaluations
    std::uint64_t privileged_critic = 0; // critic evaluations that consume s+
    std::uint64_t total() const { return privileged_inputs + privileged_model + oracle_posterior + privileged_critic; }
};

// Deterministic part h and stochastic one-hot part, both [rows, dim].
struct Latent {
    Tensor deter;
    Tensor stoch;
    Tensor features() const;
    Latent detached() const;
    std::size_t rows() const { return deter.rows(); }
};

// alpha * KL[q || sg(p)] + beta * KL[sg(q) || p], summed over groups and
// averaged over rows. When free_bits > 0 each group's KL is clamped from
// below at that many nats.
Tensor rep_loss(const grad::CategoricalDistribution& q, const grad::CategoricalDistribution& p, double alpha,
                double beta, double free_bits = 0.0);

struct WorldLosses {
    double dyn = 0.0;
    double align = 0.0;
    double dec = 0.0;
    double pred = 0.0;
    double total = 0.0;
    double kl_star_minus = 0.0; // mean KL[s* || s-], reported even when not optimized
    double reward_mae = 0.0;
    double cost_mae = 0.0;
    bool applied = true;
};

// Posterior latents of one unrolled batch, rows ordered time-major (t * B + b).
struct PosteriorRollout {
    std::size_t batch = 0, length = 0;
    Latent minus; // s-
    Latent plus;  // s+ (undefined without a privileged model)
    Latent star;  // s* (undefined without an oracle posterior)
};

struct PredictorOutput {
    Tensor reward;    // [rows, 1]
    Tensor cost;      // [rows, 1]
    Tensor cont_logit; // [rows, 1], undefined when continuation is not predicted
};

class Rssm {
public:
    Rssm() = default;
    Rssm(const WorldModelConfig& c, std::size_t embed_in, Rng& rng, grad::ParameterSet& params,
         const std::string& name);

    Latent initial(std::size_t rows) const;
    // Advances h from (s_{t-1}, a_{t-1}) and returns the prior logits at t.
    Tensor advance(const Latent& prev, const Tensor& action, Tensor& deter_out) const;
    Tensor posterior_logits(const Tensor& deter, const Tensor& embedding) const;
    grad::Mlp& posterior() { return posterior_; }

private:
    std::size_t groups_ = 0, classes_ = 0;
    Tensor h0_;
    grad::Linear img_in_;
    grad::GruCell gru_;
    grad::Mlp prior_;
    grad::Mlp posterior_;
};

class WorldModel {
public:
    WorldModel(const WorldModelConfig& config, std::uint64_t seed);

    const WorldModelConfig& config() const { return config_; }
    grad::ParameterSet& params() { return params_; }
    const grad::ParameterSet& params() const { return params_; }
    grad::Adam& optimizer() { return optimizer_; }
    AccessCounters& counters() { return counters_; }
    const AccessCounters& counters() const { return counters_; }

    Tensor encode_observation(const Tensor& obs) const;
    Tensor encode_privileged(const Tensor& priv);

    // Unrolls posteriors over a batch and evaluates every loss term.
    struct Unrolled {
        PosteriorRollout rollout;
        Tensor total;
        WorldLosses losses;
    };
    Unrolled unroll(const env::SequenceBatch& batch, Rng& rng);

    // One optimizer step on the composite loss. The returned rollout is detached.
    std::pair<WorldLosses, PosteriorRollout> train_step(const env::SequenceBatch& batch, Rng& rng);

    // Same unroll without any parameter update.
    PosteriorRollout rollout_posterior(const env::SequenceBatch& batch, Rng& rng);

    // Imagination helpers: one prior step driven by `action` (one-hot rows).
    Latent naive_initial(std::size_t rows) const { return naive_.initial(rows); }
    Latent privileged_initial(std::size_t rows) const { return priv_.initial(rows); }
    Latent naive_imagine(const Latent& prev, const Tensor& action, Rng& rng) const;
    Latent privileged_imagine(const Latent& prev, const Tensor& action, Rng& rng);

    // Reward, cost and continuation from the configured predictor inputs. For
    // the privileged wiring `first` stands in for s* and `second` is s+ (or
    // s- under StarMinus); otherwise only `first` (s-) is used.
    PredictorOutput predict(const Latent& first, const Latent& second) const;

    // Deployment filter: naive posterior update from the observation only.
    Latent observe_step(const Latent& prev, const Tensor& prev_action, const Tensor& obs, Rng& rng,
                        bool use_mode) const;

    // Oracle posterior logits from h, z- and z+ (exposed for wiring tests).
    Tensor oracle_logits(const Tensor& deter, const Tensor& obs_embed, const Tensor& priv_embed);
    Tensor naive_posterior_logits(const Tensor& deter, const Tensor& obs_embed) const {
        return naive_.posterior_logits(deter, obs_embed);
    }
    grad::Mlp& oracle_head() { return oracle_; }
    grad::Mlp& naive_posterior_head() { return naive_.posterior(); }

    std::size_t predictor_input_dim() const;

private:
    Tensor sample(const Tensor& logits, Rng& rng) const;
    grad::CategoricalDistribution dist(const Tensor& logits) const;

    WorldModelConfig config_;
    grad::ParameterSet params_;
    Rng init_rng_;
    grad::Mlp obs_encoder_, priv_encoder_;
    Rssm naive_, priv_;
    grad::Mlp oracle_;
    grad::Mlp decoder_;      // observation (+ privileged) reconstruction
    grad::Mlp priv_decoder_; // privileged reconstruction from s+
    grad::Mlp reward_head_, cost_head_, cont_head_;
    grad::Adam optimizer_;
    AccessCounters counters_;
};

} // namespace pig::world
