#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pig/env/gridworld.hpp"
#include "pig/env/replay.hpp"
#include "pig/policy/actor_critic.hpp"
#include "pig/policy/evaluate.hpp"
#include "pig/policy/lagrange.hpp"
#include "pig/train/config.hpp"
#include "pig/train/metrics.hpp"
#include "pig/world/world_model.hpp"

namespace pig::train {

// Single-threaded collect -> world update -> imagination update loop with a
// metrics row (including an evaluation) at env_step 0 and at every
// eval_interval boundary. Everything is a function of the config and seed.
class Trainer {
public:
    explicit Trainer(RunConfig config);
    Trainer(const Trainer&) = delete;
    Trainer& operator=(const Trainer&) = delete;

    const RunConfig& config() const { return config_; }
    std::uint64_t config_hash() const { return hash_; }

    // Advances until `env_step` reaches `until` (capped at total_env_steps).
    // Writes the initial row on the first call.
    void run(std::size_t until = static_cast<std::size_t>(-1));
    bool finished() const { return env_step_ >= config_.training.total_env_steps && wrote_final_; }

    std::size_t env_step() const { return env_step_; }
    std::size_t updates() const { return updates_; }
    const std::vector<MetricsRow>& rows() const { return rows_; }
    // Called for every metrics row as it is produced.
    void on_row(std::function<void(const MetricsRow&)> sink) { sink_ = std::move(sink); }

    // KL[s* || s-] of the first world-model batch, before any update.
    double initial_kl() const { return initial_kl_; }
    // Privileged reads during evaluation episodes, summed over all rows.
    const world::AccessCounters& eval_access() const { return eval_access_; }
    const world::AccessCounters& train_access() const { return world_.counters(); }

    world::WorldModel& world_model() { return world_; }
    policy::ActorCritic& agent() { return ac_; }
    const policy::Lagrange& lagrange() const { return lagrange_; }
    const env::ReplayBuffer& replay() const { return replay_; }

    std::string checkpoint_bytes() const;
    void save_checkpoint(const std::string& path) const;
    // Rebuilds a trainer from a checkpoint; the embedded config is used as-is.
    static std::unique_ptr<Trainer> from_checkpoint_bytes(const std::string& bytes);
    static std::unique_ptr<Trainer> from_checkpoint(const std::string& path);

private:
    void collect_step();
    void train_iteration();
    void write_row();
    void restore(const std::string& bytes);

    RunConfig config_;
    std::uint64_t hash_;
    env::GridWorld env_;
    env::ReplayBuffer replay_;
    world::WorldModel world_;
    policy::ActorCritic ac_;
    policy::Lagrange lagrange_;
    policy::Agent actor_agent_;
    Rng collect_rng_, train_rng_;

    std::size_t env_step_ = 0, next_row_ = 0, episodes_ = 0, updates_ = 0;
    double update_credit_ = 0.0;
    bool need_reset_ = true, wrote_initial_ = false, wrote_final_ = false;
    std::vector<double> current_obs_;
    double episode_cost_ = 0.0;
    std::deque<double> recent_costs_;
    double initial_kl_ = 0.0;
    bool have_initial_kl_ = false;

    // loss sums since the last row
    MetricsRow acc_;
    std::size_t acc_count_ = 0;

    world::AccessCounters eval_access_;
    std::vector<MetricsRow> rows_;
    std::function<void(const MetricsRow&)> sink_;
    double elapsed_before_ = 0.0;
    std::chrono::steady_clock::time_point started_;
    double elapsed() const;
};

// Writes config.json, metrics.csv, checkpoint.bin and summary.json under `dir`.
struct RunArtifacts {
    std::string dir, metrics, checkpoint, summary, config;
};
RunArtifacts artifact_paths(const std::string& dir);
void run_training(Trainer& trainer, const std::string& dir, bool resumed);

// Output root: $PIG_OUTPUT_DIR when set, else "runs".
std::string output_root();

} // namespace pig::train
