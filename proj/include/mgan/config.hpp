#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "mgan/env.hpp"

namespace mgan {

// Bad or missing config fields; the message names the field. CLI maps this
// to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kVersionString = "mgan 1.0.0";

// All training hyperparameters. Defaults are desk-scale: G and the
// evaluation protocol follow the published setup, the rest are conventional
// recurrent value-decomposition settings.
struct TrainConfig {
  double gamma = 0.99;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  std::uint64_t epsilon_anneal_steps = 50'000;
  std::uint64_t buffer_capacity = 5000;   // episodes
  std::uint64_t batch_size = 32;          // episodes per gradient step
  std::uint64_t target_update_interval = 200;  // train steps
  std::uint64_t n_graphs = 4;
  double learning_rate = 5e-4;
  double rms_decay = 0.99;
  double rms_epsilon = 1e-5;
  std::uint64_t total_env_steps = 0;
  std::uint64_t eval_interval = 10'000;  // env steps
  std::uint64_t eval_episodes = 32;
  std::uint64_t hidden_dim = 64;
  std::uint64_t emb_dim = 32;
  std::uint64_t qmix_embed = 32;
  std::uint64_t train_interval_episodes = 1;
  // Optional early termination once an evaluation reaches the bar.
  std::optional<double> early_stop_return;
  std::optional<double> early_stop_win_rate;
};

struct RunConfig {
  std::string env_name;
  EnvParams env_params;
  std::string algorithm = "mgan";  // mgan | vdn | qmix
  std::uint64_t seed = 1;
  std::string out_dir;
  TrainConfig train;
};

// key = value file with [run], [env] and [train] sections. Unknown keys and
// malformed values raise ConfigError naming the field.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

// Every field materialized, stable ordering; what gets written next to a run
// and embedded in its checkpoints.
std::string serialize_run_config(const RunConfig& cfg);

std::unique_ptr<Env> make_env_from(const RunConfig& cfg, EnvParams* resolved = nullptr);

}  // namespace mgan
