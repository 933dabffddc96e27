// Command line front end: train, eval, verify, env-export.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pig/env/export.hpp"
#include "pig/pomdp/instance_io.hpp"
#include "pig/train/checkpoint.hpp"
#include "pig/train/trainer.hpp"
#include "pig/train/verify.hpp"
#include "pig/util/hash.hpp"

namespace {

enum Exit : int { Ok = 0, ConfigFailure = 1, Violation = 2, RuntimeFailure = 3 };

using namespace pig;

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw train::ConfigError("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const std::exception& e) {
        throw train::ConfigError("'" + path + "' is not valid JSON: " + e.what());
    }
}

// Accepts a full run config or a bare environment section.
env::GridWorldConfig load_env_config(const std::string& path) {
    const auto j = read_json(path);
    try {
        env::GridWorldConfig c;
        env::from_json(j.contains("env") ? j.at("env") : j, c);
        c.validate();
        return c;
    } catch (const env::ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw train::ConfigError(e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

struct TrainArgs {
    std::string config, ablation, out_dir, resume;
    std::uint64_t seed = 0;
    bool has_seed = false;
};

int cmd_train(const TrainArgs& a) {
    std::unique_ptr<train::Trainer> trainer;
    std::string dir = a.out_dir;
    if (!a.resume.empty()) {
        trainer = train::Trainer::from_checkpoint(a.resume);
        if (dir.empty()) dir = std::filesystem::path(a.resume).parent_path().string();
    } else {
        auto config = train::run_config_from_json(read_json(a.config));
        if (a.has_seed) config.training.seed = a.seed;
        if (!a.ablation.empty()) {
            try {
                config.ablation = world::ablation_from_string(a.ablation);
            } catch (const std::exception& e) {
                throw train::ConfigError(e.what());
            }
        }
        config.resolve();
        config.validate();
        if (dir.empty())
            dir = (std::filesystem::path(train::output_root()) /
                   (config.name + "-" + world::to_string(config.ablation) + "-s" +
                    std::to_string(config.training.seed)))
                      .string();
        trainer = std::make_unique<train::Trainer>(config);
    }
    train::run_training(*trainer, dir, !a.resume.empty());
    const auto& last = trainer->rows().back();
    std::cout << "run " << dir << " config_hash " << hex64(trainer->config_hash()) << "\n"
              << "env_steps " << trainer->env_step() << " updates " << trainer->updates() << " J " << last.J
              << " J_c " << last.J_c << " kl_star_minus " << trainer->initial_kl() << " -> " << last.kl_star_minus
              << "\n";
    return Ok;
}

int cmd_eval(const std::string& checkpoint, std::size_t episodes, std::uint64_t seed, bool greedy) {
    const auto trainer = train::Trainer::from_checkpoint(checkpoint);
    policy::EvalOptions opt;
    opt.episodes = episodes;
    opt.seed = seed;
    opt.greedy = greedy;
    const auto r = policy::evaluate(trainer->config().env, trainer->agent().actor(), trainer->world_model(), opt);
    nlohmann::json j{{"episodes", episodes},
                     {"J", r.mean_return},
                     {"J_c", r.mean_cost},
                     {"returns", r.returns},
                     {"costs", r.costs},
                     {"privileged_access", r.access.total()},
                     {"config_hash", hex64(trainer->config_hash())}};
    std::cout << j.dump(2) << "\n";
    return r.access.total() == 0 ? Ok : Violation;
}

struct VerifyArgs {
    std::string which, out, env_config;
    train::VerifyOptions options;
};

int cmd_verify(const VerifyArgs& a) {
    auto options = a.options;
    if (!a.env_config.empty()) options.env = load_env_config(a.env_config);
    train::VerifyOutcome result;
    if (a.which == "theorem1")
        result = train::verify_theorem1_suite(options);
    else if (a.which == "lemma2")
        result = train::verify_lemma2(options);
    else
        result = train::verify_gridworld_cross_check(options);
    const std::string out =
        a.out.empty() ? (std::filesystem::path(train::output_root()) / (a.which + ".csv")).string() : a.out;
    write_text(out, result.csv);
    for (const auto& n : result.notes) std::cout << n << "\n";
    std::cout << a.which << ": checked " << result.checked << ", violations " << result.violations << ", skipped "
              << result.skipped << ", report " << out << "\n";
    return result.ok() ? Ok : Violation;
}

int cmd_export(const std::string& config, const std::string& out) {
    const auto env_config = load_env_config(config);
    const auto ex = env::export_tabular(env_config);
    write_text(out, pomdp::to_json_text(ex.model));
    std::cout << "exported " << ex.model.num_states << " states, " << ex.model.num_actions << " actions, "
              << ex.model.num_observations << " observations to " << out << "\n";
    return Ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pig: privileged world-model training and POMDP verification"};
    app.require_subcommand(1);

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "train an agent; writes config, metrics, checkpoint, summary");
    train_cmd->add_option("--config", train_args.config, "run config JSON");
    train_cmd->add_option("--seed", train_args.seed, "override training.seed")
        ->each([&](const std::string&) { train_args.has_seed = true; });
    train_cmd->add_option("--ablation", train_args.ablation, "full | no_align | unprivileged | informed");
    train_cmd->add_option("--out-dir", train_args.out_dir, "run directory (default $PIG_OUTPUT_DIR/<name>)");
    train_cmd->add_option("--resume", train_args.resume, "continue from a checkpoint");

    std::string checkpoint;
    std::size_t episodes = 10;
    std::uint64_t eval_seed = 0;
    bool greedy = false;
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint without privileged inputs");
    eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    eval_cmd->add_option("--episodes", episodes, "number of episodes")->required();
    eval_cmd->add_option("--seed", eval_seed, "evaluation seed");
    eval_cmd->add_flag("--greedy", greedy, "mode actions instead of samples");

    VerifyArgs verify_args;
    auto* verify_cmd = app.add_subcommand("verify", "exact POMDP checks; exit 2 on any violation");
    verify_cmd->add_option("which", verify_args.which)
        ->required()
        ->check(CLI::IsMember({"theorem1", "lemma2", "gridworld-cross-check"}));
    verify_cmd->add_option("--instances", verify_args.options.instances, "random instances");
    verify_cmd->add_option("--beliefs", verify_args.options.beliefs, "beliefs per instance");
    verify_cmd->add_option("--horizon", verify_args.options.max_horizon, "maximum horizon");
    verify_cmd->add_option("--seed", verify_args.options.seed, "sweep seed");
    verify_cmd->add_option("--trials", verify_args.options.trials, "Monte Carlo draws per state-action");
    verify_cmd->add_option("--env-config", verify_args.env_config, "gridworld for the cross-check");
    verify_cmd->add_option("--out", verify_args.out, "CSV report path");

    std::string export_config, export_out;
    auto* export_cmd = app.add_subcommand("env-export", "write the tabular model of a gridworld");
    export_cmd->add_option("--config", export_config, "env or run config JSON")->required();
    export_cmd->add_option("--out", export_out, "instance JSON path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return ConfigFailure;
    }

    try {
        if (*train_cmd) {
            if (train_args.config.empty() && train_args.resume.empty())
                throw train::ConfigError("train needs --config or --resume");
            return cmd_train(train_args);
        }
        if (*eval_cmd) return cmd_eval(checkpoint, episodes, eval_seed, greedy);
        if (*verify_cmd) return cmd_verify(verify_args);
        if (*export_cmd) return cmd_export(export_config, export_out);
    } catch (const train::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return ConfigFailure;
    } catch (const env::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return ConfigFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return RuntimeFailure;
    }
    return Ok;
}
