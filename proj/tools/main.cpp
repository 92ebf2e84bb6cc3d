#include <iostream>

#include <CLI11.hpp>

#include "mgan/analysis.hpp"
#include "mgan/io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitCheckpointMismatch = 3;

struct LoadedRun {
  mgan::RunConfig config;
  mgan::ModelSpec model;
  mgan::ParameterTree params;
  std::unique_ptr<mgan::Env> env;
};

// Rebuilds the architecture from the config embedded in the checkpoint; an
// --env override must stay shape-compatible or the structural diff is
// reported.
LoadedRun load_run(const std::string& ckpt_path, const std::string& env_override) {
  mgan::Checkpoint ckpt = mgan::load_checkpoint(ckpt_path);
  LoadedRun run;
  run.config = mgan::parse_run_config(ckpt.config_text);
  if (!env_override.empty()) {
    run.config.env_name = env_override;
    run.config.env_params.clear();
  }
  run.env = mgan::make_env_from(run.config);
  run.model = mgan::ModelSpec::build(run.config.algorithm, run.env->spec(), run.config.train);

  mgan::Rng probe_rng(0);
  mgan::ParameterTree expected = run.model.init_params(probe_rng);
  mgan::require_matching_architecture(ckpt.params, expected);
  run.params = std::move(ckpt.params);
  return run;
}

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> seed,
              const std::string& out_dir) {
  mgan::RunConfig cfg = mgan::load_run_config(config_path);
  if (seed) cfg.seed = *seed;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (cfg.out_dir.empty()) {
    cfg.out_dir = "runs/" + cfg.env_name + "-" + cfg.algorithm + "-seed" +
                  std::to_string(cfg.seed);
  }

  mgan::TrainResult result = mgan::train(cfg);
  std::cout << "env_steps: " << result.env_steps << "\n"
            << "train_steps: " << result.train_steps << "\n"
            << "mean_return: " << mgan::format_double(result.final_eval.mean_return) << "\n"
            << "win_rate: " << mgan::format_double(result.final_eval.win_rate) << "\n"
            << "out: " << result.out_dir.string() << "\n";
  return kExitOk;
}

int cmd_eval(const std::string& ckpt_path, const std::string& env_name, std::uint64_t episodes,
             std::uint64_t seed, const std::string& trace_path) {
  if (episodes == 0) throw mgan::ConfigError("eval: --episodes must be positive");
  LoadedRun run = load_run(ckpt_path, env_name);
  std::vector<mgan::Episode> rolled;
  mgan::EvalStats stats = mgan::evaluate(*run.env, run.model, run.params, episodes, seed,
                                         trace_path.empty() ? nullptr : &rolled);
  if (!trace_path.empty()) {
    std::string text;
    for (const auto& ep : rolled) text += mgan::episode_to_jsonl(ep);
    mgan::write_text_file(trace_path, text);
  }
  std::cout << "{\"mean_return\": " << mgan::format_double(stats.mean_return)
            << ", \"win_rate\": " << mgan::format_double(stats.win_rate)
            << ", \"episodes\": " << stats.episodes << "}\n";
  return kExitOk;
}

int cmd_analyze(const std::string& ckpt_path, const std::string& env_name,
                std::uint64_t episodes, std::uint64_t seed, const std::string& out_dir) {
  if (episodes == 0) throw mgan::ConfigError("analyze: --episodes must be positive");
  LoadedRun run = load_run(ckpt_path, env_name);
  mgan::AnalyzeResult result =
      mgan::run_analyze(run.params, run.model, *run.env, episodes, seed, out_dir);
  std::cout << "rows: " << result.rows << "\n"
            << "analysis: " << result.analysis_csv.string() << "\n"
            << "pca: " << result.pca_csv.string() << "\n";
  for (std::size_t g = 0; g < result.weight_hp_correlation.size(); ++g) {
    std::cout << "weight_hp_correlation[g=" << g
              << "]: " << mgan::format_double(result.weight_hp_correlation[g]) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative multi-agent RL with graph-attention credit assignment"};
  app.require_subcommand(1);

  std::string config_path, out_dir, ckpt_path, env_name;
  std::optional<std::uint64_t> seed_opt;
  std::uint64_t seed = 0;
  std::uint64_t episodes = 32;

  auto* train = app.add_subcommand("train", "Train from a config file");
  train->add_option("--config", config_path, "Path to the run config")->required();
  train->add_option("--seed", seed_opt, "Override the config seed");
  train->add_option("--out", out_dir, "Output directory");

  std::string trace_path;
  auto* eval = app.add_subcommand("eval", "Greedy evaluation of a checkpoint");
  eval->add_option("--ckpt", ckpt_path, "Checkpoint file")->required();
  eval->add_option("--env", env_name, "Env name override (default: from checkpoint)");
  eval->add_option("--episodes", episodes, "Number of evaluation episodes")->required();
  eval->add_option("--seed", seed, "Evaluation seed");
  eval->add_option("--trace", trace_path, "Write evaluated episodes as JSON-lines");

  auto* analyze = app.add_subcommand("analyze", "Export embeddings, credit weights and PCA");
  analyze->add_option("--ckpt", ckpt_path, "Checkpoint file")->required();
  analyze->add_option("--env", env_name, "Env name override (default: from checkpoint)");
  analyze->add_option("--episodes", episodes, "Number of greedy episodes")->required();
  analyze->add_option("--seed", seed, "Rollout seed");
  analyze->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
    if (train->parsed()) return cmd_train(config_path, seed_opt, out_dir);
    if (eval->parsed()) return cmd_eval(ckpt_path, env_name, episodes, seed, trace_path);
    if (analyze->parsed()) return cmd_analyze(ckpt_path, env_name, episodes, seed, out_dir);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  } catch (const mgan::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const mgan::CheckpointMismatchError& e) {
    std::cerr << "checkpoint error: " << e.what();
    return kExitCheckpointMismatch;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
