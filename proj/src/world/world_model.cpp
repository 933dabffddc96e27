#include "pig/world/world_model.hpp"

#include <cmath>
#include <stdexcept>

namespace pig::world {

using namespace grad;

std::string to_string(Ablation a) {
    switch (a) {
        case Ablation::Full: return "full";
        case Ablation::NoAlign: return "no_align";
        case Ablation::Unprivileged: return "unprivileged";
        case Ablation::Informed: return "informed";
    }
    return "full";
}

Ablation ablation_from_string(const std::string& name) {
    if (name == "full") return Ablation::Full;
    if (name == "no_align") return Ablation::NoAlign;
    if (name == "unprivileged") return Ablation::Unprivileged;
    if (name == "informed" || name == "informed_style") return Ablation::Informed;
    throw std::invalid_argument("unknown ablation '" + name + "'");
}

void to_json(nlohmann::json& j, const WorldModelConfig& c) {
    j = {{"deter", c.deter},
         {"groups", c.groups},
         {"classes", c.classes},
         {"embed", c.embed},
         {"hidden", c.hidden},
         {"alpha", c.alpha},
         {"beta", c.beta},
         {"free_bits", c.free_bits},
         {"free_bits_enabled", c.free_bits_enabled},
         {"obs_weight", c.obs_weight},
         {"priv_weight", c.priv_weight},
         {"pred_weight", c.pred_weight},
         {"predict_continuation", c.predict_continuation},
         {"predictor_inputs", c.predictor_inputs == PredictorInputs::StarPlus ? "star_plus" : "star_minus"},
         {"detach_zplus_in_oracle", c.detach_zplus_in_oracle},
         {"learning_rate", c.optimizer.learning_rate},
         {"clip_norm", c.optimizer.clip_norm}};
}

void from_json(const nlohmann::json& j, WorldModelConfig& c) {
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) j.at(key).get_to(field);
    };
    get("deter", c.deter);
    get("groups", c.groups);
    get("classes", c.classes);
    get("embed", c.embed);
    get("hidden", c.hidden);
    get("alpha", c.alpha);
    get("beta", c.beta);
    get("free_bits", c.free_bits);
    get("free_bits_enabled", c.free_bits_enabled);
    get("obs_weight", c.obs_weight);
    get("priv_weight", c.priv_weight);
    get("pred_weight", c.pred_weight);
    get("predict_continuation", c.predict_continuation);
    get("detach_zplus_in_oracle", c.detach_zplus_in_oracle);
    get("learning_rate", c.optimizer.learning_rate);
    get("clip_norm", c.optimizer.clip_norm);
    if (j.contains("predictor_inputs")) {
        const auto v = j.at("predictor_inputs").get<std::string>();
        if (v == "star_plus") c.predictor_inputs = PredictorInputs::StarPlus;
        else if (v == "star_minus") c.predictor_inputs = PredictorInputs::StarMinus;
        else throw std::invalid_argument("predictor_inputs must be star_plus or star_minus");
    }
    if (c.deter == 0 || c.groups == 0 || c.classes < 2 || c.embed == 0 || c.hidden == 0)
        throw std::invalid_argument("world model dimensions must be positive (classes >= 2)");
    if (c.alpha < 0 || c.beta < 0 || c.free_bits < 0) throw std::invalid_argument("loss weights must be >= 0");
}

Tensor Latent::features() const { return concat({deter, stoch}); }

Latent Latent::detached() const { return {stop_gradient(deter), stop_gradient(stoch)}; }

namespace {

// KL[q || p] per group, shape [batch * groups, 1].
Tensor kl_per_group(const CategoricalDistribution& q, const CategoricalDistribution& p) {
    const Tensor terms = q.probs() * (q.log_probs() - p.log_probs());
    return sum_cols(reshape(terms, {q.batch() * q.groups(), q.classes()}));
}

Tensor clamped_kl(const CategoricalDistribution& q, const CategoricalDistribution& p, double free_bits) {
    if (free_bits <= 0.0) return mean(kl_categorical(q, p));
    return static_cast<double>(q.groups()) * mean(clamp_min(kl_per_group(q, p), free_bits));
}

} // namespace

Tensor rep_loss(const CategoricalDistribution& q, const CategoricalDistribution& p, double alpha, double beta,
                double free_bits) {
    return alpha * clamped_kl(q, p.detached(), free_bits) + beta * clamped_kl(q.detached(), p, free_bits);
}

namespace {

Tensor row_mask(const std::vector<double>& flags, std::size_t offset, std::size_t rows, std::size_t cols,
                bool invert) {
    std::vector<double> v(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const double f = flags[offset + r] > 0.5 ? 1.0 : 0.0;
        const double m = invert ? 1.0 - f : f;
        for (std::size_t c = 0; c < cols; ++c) v[r * cols + c] = m;
    }
    return Tensor::from({rows, cols}, std::move(v));
}

Tensor block(const std::vector<double>& data, std::size_t rows, std::size_t cols) {
    return Tensor::from({rows, cols}, std::vector<double>(data.begin(), data.begin() + rows * cols));
}

Tensor bernoulli_nll(const Tensor& logits, const Tensor& targets) {
    return sum_cols(softplus(logits) - targets * logits);
}

Tensor gaussian_nll(const Tensor& mean_pred, const Tensor& targets) {
    return sum_cols(0.5 * square(mean_pred - targets));
}

double mae(const Tensor& pred, const Tensor& target) {
    double s = 0.0;
    for (std::size_t i = 0; i < pred.numel(); ++i) s += std::abs(pred.values()[i] - target.values()[i]);
    return pred.numel() ? s / static_cast<double>(pred.numel()) : 0.0;
}

} // namespace

Rssm::Rssm(const WorldModelConfig& c, std::size_t embed_in, Rng& rng, ParameterSet& params,
           const std::string& name)
    : groups_(c.groups), classes_(c.classes) {
    h0_ = params.add(name + ".h0", Tensor::zeros({1, c.deter}, true));
    img_in_ = Linear(c.stoch() + c.num_actions, c.hidden, rng, params, name + ".img_in");
    gru_ = GruCell(c.hidden, c.deter, rng, params, name + ".gru");
    prior_ = Mlp(c.deter, {c.hidden}, c.stoch(), rng, params, name + ".prior");
    posterior_ = Mlp(c.deter + embed_in, {c.hidden}, c.stoch(), rng, params, name + ".posterior");
}

Latent Rssm::initial(std::size_t rows) const {
    Tensor ones = Tensor::full({rows, 1}, 1.0);
    return {tanh(matmul(ones, h0_)), Tensor::zeros({rows, groups_ * classes_})};
}

Tensor Rssm::advance(const Latent& prev, const Tensor& action, Tensor& deter_out) const {
    Tensor x = elu(img_in_(concat({prev.stoch, action})));
    deter_out = gru_(x, prev.deter);
    return prior_(deter_out);
}

Tensor Rssm::posterior_logits(const Tensor& deter, const Tensor& embedding) const {
    return posterior_(concat({deter, embedding}));
}

WorldModel::WorldModel(const WorldModelConfig& config, std::uint64_t seed) : config_(config), init_rng_(seed) {
    const auto& c = config_;
    const std::size_t feat = c.feature_dim();
    obs_encoder_ = Mlp(c.obs_dim, {c.hidden}, c.embed, init_rng_, params_, "enc_obs");
    naive_ = Rssm(c, c.embed, init_rng_, params_, "naive");
    if (c.privileged_model()) {
        priv_encoder_ = Mlp(c.priv_dim, {c.hidden}, c.embed, init_rng_, params_, "enc_priv");
        priv_ = Rssm(c, c.embed, init_rng_, params_, "priv");
        oracle_ = Mlp(c.deter + 2 * c.embed, {c.hidden}, c.stoch(), init_rng_, params_, "oracle");
        decoder_ = Mlp(feat, {c.hidden}, c.obs_dim + c.priv_dim, init_rng_, params_, "decoder");
        priv_decoder_ = Mlp(feat, {c.hidden}, c.priv_dim, init_rng_, params_, "priv_decoder");
    } else {
        const std::size_t out = c.ablation == Ablation::Informed ? c.obs_dim + c.priv_dim : c.obs_dim;
        decoder_ = Mlp(feat, {c.hidden}, out, init_rng_, params_, "decoder");
    }
    const std::size_t pin = predictor_input_dim();
    reward_head_ = Mlp(pin, {c.hidden}, 1, init_rng_, params_, "reward");
    cost_head_ = Mlp(pin, {c.hidden}, 1, init_rng_, params_, "cost");
    if (c.predict_continuation) cont_head_ = Mlp(pin, {c.hidden}, 1, init_rng_, params_, "cont");
    optimizer_ = Adam(params_.tensors(), c.optimizer);
}

std::size_t WorldModel::predictor_input_dim() const {
    return config_.privileged_model() ? 2 * config_.feature_dim() : config_.feature_dim();
}

Tensor WorldModel::encode_observation(const Tensor& obs) const { return obs_encoder_(obs); }

Tensor WorldModel::encode_privileged(const Tensor& priv) {
    counters_.privileged_inputs += priv.rows();
    return priv_encoder_(priv);
}

Tensor WorldModel::oracle_logits(const Tensor& deter, const Tensor& obs_embed, const Tensor& priv_embed) {
    counters_.oracle_posterior += deter.rows();
    const Tensor zp = config_.detach_zplus_in_oracle ? stop_gradient(priv_embed) : priv_embed;
    return oracle_(concat({deter, obs_embed, zp}));
}

Tensor WorldModel::sample(const Tensor& logits, Rng& rng) const {
    return straight_through_onehot(logits, config_.groups, rng);
}

CategoricalDistribution WorldModel::dist(const Tensor& logits) const {
    return CategoricalDistribution(logits, config_.groups, config_.classes);
}

WorldModel::Unrolled WorldModel::unroll(const env::SequenceBatch& batch, Rng& rng) {
    const auto& c = config_;
    const std::size_t B = batch.batch, T = batch.length, N = B * T;
    if (batch.obs_dim != c.obs_dim || batch.num_actions != c.num_actions ||
        (c.privileged_model() || c.ablation == Ablation::Informed ? batch.priv_dim != c.priv_dim : false))
        throw std::invalid_argument("batch dimensions do not match the world model");
    const bool priv = c.privileged_model();

    const Tensor obs = block(batch.observation, N, c.obs_dim);
    const Tensor actions = block(batch.prev_action, N, c.num_actions);
    const Tensor e_minus = encode_observation(obs);
    Tensor privileged, z_plus;
    if (priv || c.ablation == Ablation::Informed) privileged = block(batch.privileged, N, c.priv_dim);
    if (priv) z_plus = encode_privileged(privileged);

    std::vector<double> first = batch.is_first;
    for (std::size_t b = 0; b < B; ++b) first[b] = 1.0; // window start is always a reset

    std::vector<Tensor> prior_m, post_m, deter_m, stoch_m, oracle_l, stoch_s, prior_p, post_p, deter_p, stoch_p;
    Latent init_m = naive_.initial(B), init_p;
    if (priv) init_p = priv_.initial(B);
    Latent prev_m = init_m, prev_p = init_p;

    for (std::size_t t = 0; t < T; ++t) {
        const std::size_t off = t * B;
        const Tensor keep_d = row_mask(first, off, B, c.deter, true);
        const Tensor reset_d = row_mask(first, off, B, c.deter, false);
        const Tensor keep_s = row_mask(first, off, B, c.stoch(), true);
        const Tensor keep_a = row_mask(first, off, B, c.num_actions, true);
        const Tensor a = slice_rows(actions, off, B) * keep_a;
        const Tensor em = slice_rows(e_minus, off, B);

        Latent in_m{prev_m.deter * keep_d + init_m.deter * reset_d, prev_m.stoch * keep_s};
        Tensor h_m;
        prior_m.push_back(naive_.advance(in_m, a, h_m));
        post_m.push_back(naive_.posterior_logits(h_m, em));
        Tensor s_m = sample(post_m.back(), rng);
        deter_m.push_back(h_m);
        stoch_m.push_back(s_m);
        prev_m = {h_m, s_m};

        if (priv) {
            const Tensor zp = slice_rows(z_plus, off, B);
            oracle_l.push_back(oracle_logits(h_m, em, zp));
            stoch_s.push_back(sample(oracle_l.back(), rng));

            Latent in_p{prev_p.deter * keep_d + init_p.deter * reset_d, prev_p.stoch * keep_s};
            Tensor h_p;
            counters_.privileged_model += B;
            prior_p.push_back(priv_.advance(in_p, a, h_p));
            post_p.push_back(priv_.posterior_logits(h_p, zp));
            Tensor s_p = sample(post_p.back(), rng);
            deter_p.push_back(h_p);
            stoch_p.push_back(s_p);
            prev_p = {h_p, s_p};
        }
    }

    Unrolled out;
    out.rollout.batch = B;
    out.rollout.length = T;
    out.rollout.minus = {concat_rows(deter_m), concat_rows(stoch_m)};
    if (priv) {
        out.rollout.star = {out.rollout.minus.deter, concat_rows(stoch_s)};
        out.rollout.plus = {concat_rows(deter_p), concat_rows(stoch_p)};
    }
    const auto& R = out.rollout;
    const double fb = c.free_bits_enabled ? c.free_bits : 0.0;

    Tensor dyn = rep_loss(dist(concat_rows(prior_m)), dist(concat_rows(post_m)), c.alpha, c.beta, fb);
    if (priv) dyn = dyn + rep_loss(dist(concat_rows(prior_p)), dist(concat_rows(post_p)), c.alpha, c.beta, fb);

    Tensor align;
    WorldLosses& L = out.losses;
    if (priv) {
        const auto q_star = dist(concat_rows(oracle_l));
        const auto p_minus = dist(concat_rows(post_m));
        L.kl_star_minus = mean(kl_categorical(q_star.detached(), p_minus.detached())).item();
        if (c.align()) align = rep_loss(q_star, p_minus, c.alpha, c.beta, 0.0);
    }

    Tensor dec;
    if (priv) {
        const Tensor out_star = decoder_(R.star.features());
        dec = c.obs_weight * mean(bernoulli_nll(slice_cols(out_star, 0, c.obs_dim), obs)) +
              c.priv_weight * mean(gaussian_nll(slice_cols(out_star, c.obs_dim, c.priv_dim), privileged)) +
              c.priv_weight * mean(gaussian_nll(priv_decoder_(R.plus.features()), privileged));
    } else {
        const Tensor out_minus = decoder_(R.minus.features());
        dec = c.obs_weight * mean(bernoulli_nll(slice_cols(out_minus, 0, c.obs_dim), obs));
        if (c.ablation == Ablation::Informed)
            dec = dec + c.priv_weight * mean(gaussian_nll(slice_cols(out_minus, c.obs_dim, c.priv_dim), privileged));
    }

    PredictorOutput p = priv ? predict(R.star, c.predictor_inputs == PredictorInputs::StarPlus ? R.plus : R.minus)
                             : predict(R.minus, Latent{});
    const Tensor reward = Tensor::from({N, 1}, batch.reward);
    const Tensor cost = Tensor::from({N, 1}, batch.cost);
    Tensor pred = mean(gaussian_nll(p.reward, reward)) + mean(gaussian_nll(p.cost, cost));
    if (c.predict_continuation) {
        std::vector<double> cont(N);
        for (std::size_t i = 0; i < N; ++i) cont[i] = batch.is_terminal[i] > 0.5 ? 0.0 : 1.0;
        pred = pred + mean(bernoulli_nll(p.cont_logit, Tensor::from({N, 1}, std::move(cont))));
    }

    Tensor total = dyn + dec + c.pred_weight * pred;
    if (align.defined()) total = total + align;

    L.dyn = dyn.item();
    L.align = align.defined() ? align.item() : 0.0;
    L.dec = dec.item();
    L.pred = pred.item();
    L.total = total.item();
    L.reward_mae = mae(p.reward, reward);
    L.cost_mae = mae(p.cost, cost);
    out.total = total;
    return out;
}

std::pair<WorldLosses, PosteriorRollout> WorldModel::train_step(const env::SequenceBatch& batch, Rng& rng) {
    Unrolled u = unroll(batch, rng);
    optimizer_.zero_grad();
    if (std::isfinite(u.losses.total)) {
        backward(u.total);
        u.losses.applied = optimizer_.step().applied;
    } else {
        u.losses.applied = false;
    }
    PosteriorRollout r = u.rollout;
    r.minus = r.minus.detached();
    if (r.plus.deter.defined()) r.plus = r.plus.detached();
    if (r.star.deter.defined()) r.star = r.star.detached();
    return {u.losses, r};
}

PosteriorRollout WorldModel::rollout_posterior(const env::SequenceBatch& batch, Rng& rng) {
    params_.set_requires_grad(false);
    Unrolled u = unroll(batch, rng);
    params_.set_requires_grad(true);
    return u.rollout;
}

Latent WorldModel::naive_imagine(const Latent& prev, const Tensor& action, Rng& rng) const {
    Tensor h;
    const Tensor logits = naive_.advance(prev, action, h);
    return {h, sample(logits, rng)};
}

Latent WorldModel::privileged_imagine(const Latent& prev, const Tensor& action, Rng& rng) {
    if (!config_.privileged_model()) throw std::logic_error("no privileged model in this ablation");
    counters_.privileged_model += prev.rows();
    Tensor h;
    const Tensor logits = priv_.advance(prev, action, h);
    return {h, sample(logits, rng)};
}

PredictorOutput WorldModel::predict(const Latent& first, const Latent& second) const {
    const Tensor in = config_.privileged_model() ? concat({first.features(), second.features()}) : first.features();
    PredictorOutput out;
    out.reward = reward_head_(in);
    out.cost = cost_head_(in);
    if (config_.predict_continuation) out.cont_logit = cont_head_(in);
    return out;
}

Latent WorldModel::observe_step(const Latent& prev, const Tensor& prev_action, const Tensor& obs, Rng& rng,
                                bool use_mode) const {
    Tensor h;
    naive_.advance(prev, prev_action, h);
    const Tensor logits = naive_.posterior_logits(h, encode_observation(obs));
    return {h, use_mode ? straight_through_mode(logits, config_.groups) : sample(logits, rng)};
}

} // namespace pig::world
