#include "pig/train/trainer.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "pig/train/checkpoint.hpp"
#include "pig/util/hash.hpp"

namespace pig::train {

namespace {

using grad::Tensor;
using world::Latent;

constexpr std::size_t kRecentEpisodes = 10;

// Freezes a parameter set for the lifetime of the guard.
class Frozen {
public:
    explicit Frozen(grad::ParameterSet& set) : set_(set) { set_.set_requires_grad(false); }
    ~Frozen() { set_.set_requires_grad(true); }
    Frozen(const Frozen&) = delete;
    Frozen& operator=(const Frozen&) = delete;

private:
    grad::ParameterSet& set_;
};

Tensor take_rows(const Tensor& t, const std::vector<std::size_t>& rows) {
    const std::size_t cols = t.cols();
    std::vector<double> out;
    out.reserve(rows.size() * cols);
    for (std::size_t r : rows)
        for (std::size_t c = 0; c < cols; ++c) out.push_back(t.at(r, c));
    return Tensor::from({rows.size(), cols}, std::move(out));
}

Latent take_rows(const Latent& l, const std::vector<std::size_t>& rows) {
    if (!l.deter.defined()) return l;
    return {take_rows(l.deter, rows), take_rows(l.stoch, rows)};
}

std::vector<double> row_values(const MetricsRow& r) {
    return {static_cast<double>(r.env_step), r.wall_time, r.J, r.J_c, r.L_dyn, r.L_align, r.L_dec, r.L_pred,
            r.actor_loss, r.critic_r_loss, r.critic_c_loss, r.lambda_p, r.mu_k, r.entropy, r.kl_star_minus,
            static_cast<double>(r.updates)};
}

MetricsRow row_from_values(const std::vector<double>& v, const std::string& hash) {
    if (v.size() != 16) throw CheckpointError("checkpoint: bad metrics row");
    MetricsRow r;
    r.env_step = static_cast<std::size_t>(v[0]);
    r.wall_time = v[1];
    r.J = v[2];
    r.J_c = v[3];
    r.L_dyn = v[4];
    r.L_align = v[5];
    r.L_dec = v[6];
    r.L_pred = v[7];
    r.actor_loss = v[8];
    r.critic_r_loss = v[9];
    r.critic_c_loss = v[10];
    r.lambda_p = v[11];
    r.mu_k = v[12];
    r.entropy = v[13];
    r.kl_star_minus = v[14];
    r.updates = static_cast<std::size_t>(v[15]);
    r.config_hash = hash;
    return r;
}

void write_counters(CheckpointWriter& w, const world::AccessCounters& c) {
    w.u64(c.privileged_inputs);
    w.u64(c.privileged_model);
    w.u64(c.oracle_posterior);
    w.u64(c.privileged_critic);
}

void read_counters(CheckpointReader& r, world::AccessCounters& c) {
    c.privileged_inputs = r.u64();
    c.privileged_model = r.u64();
    c.oracle_posterior = r.u64();
    c.privileged_critic = r.u64();
}

void add_counters(world::AccessCounters& into, const world::AccessCounters& c) {
    into.privileged_inputs += c.privileged_inputs;
    into.privileged_model += c.privileged_model;
    into.oracle_posterior += c.oracle_posterior;
    into.privileged_critic += c.privileged_critic;
}

std::vector<double> tensor_values(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

void write_critic(CheckpointWriter& w, const policy::Critic& critic, const grad::Adam& opt) {
    w.params(critic.params());
    w.params(critic.slow_params());
    w.adam(opt);
}

void read_critic(CheckpointReader& r, policy::Critic& critic, grad::Adam& opt) {
    r.params(critic.params());
    r.params(critic.slow_params());
    r.adam(opt);
}

} // namespace

Trainer::Trainer(RunConfig config)
    : config_([&] {
          config.resolve();
          config.validate();
          return std::move(config);
      }()),
      hash_(train::config_hash(config_)),
      env_(config_.env),
      replay_(config_.training.replay_capacity, config_.env.observation_dim(), config_.env.privileged_dim(),
              env::kNumActions),
      world_(config_.world, mix_seed(config_.training.seed, 3)),
      ac_(config_.policy, world_, mix_seed(config_.training.seed, 4)),
      lagrange_(config_.lagrange),
      actor_agent_(world_, ac_.actor()),
      collect_rng_(mix_seed(config_.training.seed, 1)),
      train_rng_(mix_seed(config_.training.seed, 2)),
      started_(std::chrono::steady_clock::now()) {}

double Trainer::elapsed() const {
    if (!config_.training.record_wall_time) return 0.0;
    const std::chrono::duration<double> d = std::chrono::steady_clock::now() - started_;
    return elapsed_before_ + d.count();
}

void Trainer::run(std::size_t until) {
    const std::size_t total = config_.training.total_env_steps;
    const std::size_t target = std::min(until, total);
    if (!wrote_initial_) {
        write_row();
        wrote_initial_ = true;
        next_row_ = config_.training.eval_interval;
    }
    while (env_step_ < target) {
        collect_step();
        if (env_step_ >= next_row_ && env_step_ < total) {
            write_row();
            while (next_row_ <= env_step_) next_row_ += config_.training.eval_interval;
        }
    }
    if (env_step_ >= total && !wrote_final_) {
        if (rows_.empty() || rows_.back().env_step != env_step_) write_row();
        wrote_final_ = true;
    }
}

void Trainer::collect_step() {
    const auto& t = config_.training;
    if (need_reset_) {
        const auto first = env_.reset(mix_seed(mix_seed(t.seed, 6), episodes_));
        actor_agent_.reset();
        env::Transition step;
        step.observation = first.observation;
        step.privileged = first.privileged;
        step.is_first = true;
        replay_.add(step);
        current_obs_ = first.observation;
        episode_cost_ = 0.0;
        need_reset_ = false;
    }

    int action = 0;
    {
        Frozen world_guard(world_.params());
        Frozen actor_guard(ac_.actor().params());
        actor_agent_.observe(current_obs_, collect_rng_, false);
        if (replay_.total_added() <= t.prefill)
            action = static_cast<int>(collect_rng_.index(env::kNumActions));
        else
            action = actor_agent_.choose(collect_rng_, false);
        actor_agent_.record_action(action);
    }

    const int before = env_.steps();
    const auto result = env_.step(action);
    const auto advanced = static_cast<std::size_t>(env_.steps() - before);
    env_step_ += advanced;

    env::Transition step;
    step.observation = result.observation;
    step.privileged = result.privileged;
    step.prev_action = action;
    step.reward = result.reward;
    step.cost = result.cost;
    step.is_terminal = result.terminal;
    replay_.add(step);
    current_obs_ = result.observation;
    episode_cost_ += result.cost;
    if (result.done()) {
        recent_costs_.push_back(episode_cost_);
        if (recent_costs_.size() > kRecentEpisodes) recent_costs_.pop_front();
        ++episodes_;
        need_reset_ = true;
    }

    if (replay_.total_added() <= t.prefill || replay_.size() < t.length) return;
    update_credit_ += t.train_ratio * static_cast<double>(advanced) / static_cast<double>(t.batch * t.length);
    while (update_credit_ >= 1.0) {
        train_iteration();
        update_credit_ -= 1.0;
    }
}

void Trainer::train_iteration() {
    using world::Latent;
    const auto& t = config_.training;
    const auto batch = replay_.sample(t.batch, t.length, train_rng_);
    if (!batch) return;
    auto [losses, rollout] = world_.train_step(*batch, train_rng_);
    if (!have_initial_kl_) {
        initial_kl_ = losses.kl_star_minus;
        have_initial_kl_ = true;
    }

    Latent minus = rollout.minus, plus = rollout.plus;
    const std::size_t rows = minus.rows();
    const std::size_t starts = config_.policy.starts;
    if (starts > 0 && starts < rows) {
        std::vector<std::size_t> idx(rows);
        std::iota(idx.begin(), idx.end(), 0);
        for (std::size_t i = 0; i < starts; ++i) std::swap(idx[i], idx[i + train_rng_.index(rows - i)]);
        idx.resize(starts);
        minus = take_rows(minus, idx);
        plus = take_rows(plus, idx);
    }

    double measured = 0.0;
    const double* override = nullptr;
    if (config_.lagrange.measured_cost && !recent_costs_.empty()) {
        measured = std::accumulate(recent_costs_.begin(), recent_costs_.end(), 0.0) /
                       static_cast<double>(recent_costs_.size()) -
                   config_.env.budget;
        override = &measured;
    }
    const auto report = ac_.update(world_, minus, plus, &lagrange_, train_rng_, override);

    ++updates_;
    ++acc_count_;
    acc_.L_dyn += losses.dyn;
    acc_.L_align += losses.align;
    acc_.L_dec += losses.dec;
    acc_.L_pred += losses.pred;
    acc_.kl_star_minus += losses.kl_star_minus;
    acc_.actor_loss += report.actor_loss;
    acc_.critic_r_loss += report.critic_r_loss;
    acc_.critic_c_loss += report.critic_c_loss;
    acc_.entropy += report.entropy;
}

void Trainer::write_row() {
    const auto& t = config_.training;
    policy::EvalOptions options;
    options.episodes = t.eval_episodes;
    options.seed = mix_seed(t.seed, 5);
    options.greedy = t.greedy_eval;
    policy::EvalResult result;
    {
        Frozen world_guard(world_.params());
        Frozen actor_guard(ac_.actor().params());
        result = policy::evaluate(config_.env, ac_.actor(), world_, options);
    }
    add_counters(eval_access_, result.access);

    MetricsRow row;
    if (acc_count_ > 0) {
        const double n = static_cast<double>(acc_count_);
        row = acc_;
        row.L_dyn /= n;
        row.L_align /= n;
        row.L_dec /= n;
        row.L_pred /= n;
        row.kl_star_minus /= n;
        row.actor_loss /= n;
        row.critic_r_loss /= n;
        row.critic_c_loss /= n;
        row.entropy /= n;
    }
    row.env_step = env_step_;
    row.wall_time = elapsed();
    row.J = result.mean_return;
    row.J_c = result.mean_cost;
    row.lambda_p = lagrange_.multiplier();
    row.mu_k = lagrange_.mu();
    row.updates = acc_count_;
    row.config_hash = hex64(hash_);
    rows_.push_back(row);
    acc_ = MetricsRow{};
    acc_count_ = 0;
    if (sink_) sink_(row);
}

std::string Trainer::checkpoint_bytes() const {
    auto& self = const_cast<Trainer&>(*this); // parameter accessors are non-const only
    CheckpointWriter w;
    w.str(to_json(config_).dump());
    w.u64(hash_);

    w.u64(env_step_);
    w.u64(next_row_);
    w.u64(episodes_);
    w.u64(updates_);
    w.f64(update_credit_);
    w.boolean(need_reset_);
    w.boolean(wrote_initial_);
    w.boolean(wrote_final_);
    w.f64(episode_cost_);
    w.doubles(std::vector<double>(recent_costs_.begin(), recent_costs_.end()));
    w.f64(initial_kl_);
    w.boolean(have_initial_kl_);
    w.doubles(row_values(acc_));
    w.u64(acc_count_);
    write_counters(w, eval_access_);
    write_counters(w, world_.counters());
    w.u64(rows_.size());
    for (const auto& row : rows_) w.doubles(row_values(row));
    w.f64(elapsed());

    w.str(collect_rng_.serialize());
    w.str(train_rng_.serialize());

    const auto es = env_.state();
    w.u64(static_cast<std::uint64_t>(static_cast<std::int64_t>(es.agent.x)));
    w.u64(static_cast<std::uint64_t>(static_cast<std::int64_t>(es.agent.y)));
    w.u64(static_cast<std::uint64_t>(es.steps));
    w.boolean(es.done);
    for (int a : es.last_actions) w.u64(static_cast<std::uint64_t>(static_cast<std::int64_t>(a)));
    w.u64(static_cast<std::uint64_t>(static_cast<std::int64_t>(es.last_displacement.x)));
    w.u64(static_cast<std::uint64_t>(static_cast<std::int64_t>(es.last_displacement.y)));
    w.str(es.rng);
    w.doubles(current_obs_);
    w.doubles(tensor_values(actor_agent_.latent().deter));
    w.doubles(tensor_values(actor_agent_.latent().stoch));
    w.doubles(tensor_values(actor_agent_.prev_action()));

    std::ostringstream replay;
    replay_.save(replay);
    w.str(replay.str());

    w.params(world_.params());
    w.adam(self.world_.optimizer());
    w.params(ac_.actor().params());
    w.adam(self.ac_.actor_optimizer());
    write_critic(w, ac_.reward_critic(), self.ac_.reward_optimizer());
    write_critic(w, ac_.cost_critic(), self.ac_.cost_optimizer());

    w.f64(lagrange_.multiplier());
    w.f64(lagrange_.mu());
    w.f64(lagrange_.pid().integral);
    w.f64(lagrange_.pid().prev_error);
    w.boolean(lagrange_.pid().has_prev);
    w.u64(lagrange_.updates());
    return w.finish();
}

void Trainer::save_checkpoint(const std::string& path) const { write_file(path, checkpoint_bytes()); }

std::unique_ptr<Trainer> Trainer::from_checkpoint_bytes(const std::string& bytes) {
    CheckpointReader r(bytes);
    RunConfig config;
    try {
        config = run_config_from_json(nlohmann::json::parse(r.str()));
    } catch (const std::exception& e) {
        throw CheckpointError(std::string("checkpoint: bad embedded config: ") + e.what());
    }
    auto trainer = std::make_unique<Trainer>(config);
    if (r.u64() != trainer->hash_) throw CheckpointError("checkpoint: config hash mismatch");
    trainer->restore(bytes);
    return trainer;
}

std::unique_ptr<Trainer> Trainer::from_checkpoint(const std::string& path) {
    return from_checkpoint_bytes(read_file(path));
}

void Trainer::restore(const std::string& bytes) {
    using grad::Tensor;
    using world::Latent;
    CheckpointReader r(bytes);
    r.str();
    r.u64();

    env_step_ = r.u64();
    next_row_ = r.u64();
    episodes_ = r.u64();
    updates_ = r.u64();
    update_credit_ = r.f64();
    need_reset_ = r.boolean();
    wrote_initial_ = r.boolean();
    wrote_final_ = r.boolean();
    episode_cost_ = r.f64();
    const auto recent = r.doubles();
    recent_costs_.assign(recent.begin(), recent.end());
    initial_kl_ = r.f64();
    have_initial_kl_ = r.boolean();
    const std::string hash = hex64(hash_);
    acc_ = row_from_values(r.doubles(), "");
    acc_count_ = r.u64();
    read_counters(r, eval_access_);
    read_counters(r, world_.counters());
    rows_.resize(r.u64());
    for (auto& row : rows_) row = row_from_values(r.doubles(), hash);
    elapsed_before_ = r.f64();
    started_ = std::chrono::steady_clock::now();

    collect_rng_.deserialize(r.str());
    train_rng_.deserialize(r.str());

    env::EnvState es;
    es.agent.x = static_cast<int>(static_cast<std::int64_t>(r.u64()));
    es.agent.y = static_cast<int>(static_cast<std::int64_t>(r.u64()));
    es.steps = static_cast<int>(r.u64());
    es.done = r.boolean();
    for (int& a : es.last_actions) a = static_cast<int>(static_cast<std::int64_t>(r.u64()));
    es.last_displacement.x = static_cast<int>(static_cast<std::int64_t>(r.u64()));
    es.last_displacement.y = static_cast<int>(static_cast<std::int64_t>(r.u64()));
    es.rng = r.str();
    env_.restore(es);
    current_obs_ = r.doubles();
    const Latent shape = world_.naive_initial(1);
    auto deter = r.doubles(), stoch = r.doubles(), prev = r.doubles();
    if (deter.size() != shape.deter.numel() || stoch.size() != shape.stoch.numel() ||
        prev.size() != env::kNumActions)
        throw CheckpointError("checkpoint: agent state has the wrong size");
    actor_agent_.set_state({Tensor::from(shape.deter.shape(), std::move(deter)),
                            Tensor::from(shape.stoch.shape(), std::move(stoch))},
                           Tensor::from({1, env::kNumActions}, std::move(prev)));

    std::istringstream replay(r.str());
    replay_.load(replay);

    r.params(world_.params());
    r.adam(world_.optimizer());
    r.params(ac_.actor().params());
    r.adam(ac_.actor_optimizer());
    read_critic(r, ac_.reward_critic(), ac_.reward_optimizer());
    read_critic(r, ac_.cost_critic(), ac_.cost_optimizer());

    const double lambda = r.f64(), mu = r.f64();
    policy::PidState pid = config_.lagrange.pid;
    pid.integral = r.f64();
    pid.prev_error = r.f64();
    pid.has_prev = r.boolean();
    lagrange_.set_state(lambda, mu, pid, r.u64());
    if (!r.at_end()) throw CheckpointError("checkpoint: trailing data");
}

RunArtifacts artifact_paths(const std::string& dir) {
    const std::filesystem::path d(dir);
    return {dir, (d / "metrics.csv").string(), (d / "checkpoint.bin").string(), (d / "summary.json").string(),
            (d / "config.json").string()};
}

std::string output_root() {
    const char* env = std::getenv("PIG_OUTPUT_DIR");
    return env && *env ? std::string(env) : std::string("runs");
}

void run_training(Trainer& trainer, const std::string& dir, bool resumed) {
    const auto paths = artifact_paths(dir);
    std::filesystem::create_directories(dir);
    {
        auto j = to_json(trainer.config());
        j["config_hash"] = hex64(trainer.config_hash());
        std::ofstream out(paths.config, std::ios::binary | std::ios::trunc);
        out << j.dump(2) << "\n";
    }
    MetricsWriter writer(paths.metrics, resumed);
    trainer.on_row([&](const MetricsRow& row) {
        writer.write(row);
        trainer.save_checkpoint(paths.checkpoint);
    });
    try {
        trainer.run();
    } catch (const std::exception& e) {
        // Metrics and the last row checkpoint stay as written.
        trainer.on_row({});
        nlohmann::json failure{{"config_hash", hex64(trainer.config_hash())},
                               {"env_steps", trainer.env_step()},
                               {"status", "failed"},
                               {"error", e.what()}};
        std::ofstream out(paths.summary, std::ios::binary | std::ios::trunc);
        out << failure.dump(2) << "\n";
        throw;
    }
    trainer.save_checkpoint(paths.checkpoint);
    trainer.on_row({});

    const auto& rows = trainer.rows();
    const auto& eval = trainer.eval_access();
    const auto& train = trainer.train_access();
    nlohmann::json s{{"config_hash", hex64(trainer.config_hash())},
                     {"status", "ok"},
                     {"env_steps", trainer.env_step()},
                     {"updates", trainer.updates()},
                     {"final_J", rows.empty() ? 0.0 : rows.back().J},
                     {"final_J_c", rows.empty() ? 0.0 : rows.back().J_c},
                     {"initial_kl_star_minus", trainer.initial_kl()},
                     {"final_kl_star_minus", rows.empty() ? 0.0 : rows.back().kl_star_minus},
                     {"lambda_p", trainer.lagrange().multiplier()},
                     {"eval_privileged_access", eval.total()},
                     {"train_access",
                      {{"privileged_inputs", train.privileged_inputs},
                       {"privileged_model", train.privileged_model},
                       {"oracle_posterior", train.oracle_posterior},
                       {"privileged_critic", train.privileged_critic}}}};
    std::ofstream out(paths.summary, std::ios::binary | std::ios::trunc);
    out << s.dump(2) << "\n";
}

} // namespace pig::train
