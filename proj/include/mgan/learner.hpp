#pragma once

#include <filesystem>

#include "mgan/checkpoint.hpp"
#include "mgan/episode.hpp"
#include "mgan/optim.hpp"

namespace mgan {

// Recurrent forward over a padded batch; hidden states run across the whole
// episode so gradients flow through time. Returns Q_tot per frame:
//   greedy=false — frames 0..T-1 at the recorded actions (training pass)
//   greedy=true  — frames 0..T at per-agent greedy actions (target pass;
//                  the joint max decomposes because the mixers are monotone)
std::vector<VarId> batched_qtot_forward(Tape& t, Binding& bind, const ModelSpec& model,
                                        const EpisodeBatch& batch, bool greedy);

// y_t = r_t + γ·(1-terminated_t)·Q_tot(frame t+1, greedy | target params).
// Computed without gradients; targets are constants in the loss.
std::vector<RealArray> td_targets(const EpisodeBatch& batch, const ModelSpec& model,
                                  const ParameterTree& target_params, double gamma);

// Mean squared TD error over filled steps.
VarId td_loss(Tape& t, Binding& bind, const ModelSpec& model, const EpisodeBatch& batch,
              const std::vector<RealArray>& targets);

struct EvalStats {
  double mean_return = 0.0;
  double win_rate = 0.0;
  std::uint64_t episodes = 0;
};

// Fresh greedy episodes (ε = 0); win = env success flag. `out_episodes`,
// when given, receives the rolled episodes (trace export).
EvalStats evaluate(Env& env, const ModelSpec& model, const ParameterTree& params,
                   std::uint64_t episodes, std::uint64_t seed,
                   std::vector<Episode>* out_episodes = nullptr);

struct TrainResult {
  ParameterTree params;
  OptimizerState optimizer;
  ModelSpec model;
  EvalStats final_eval;
  std::uint64_t env_steps = 0;
  std::uint64_t train_steps = 0;
  std::filesystem::path out_dir;
  std::filesystem::path checkpoint_path;
  std::filesystem::path metrics_path;
};

// Full training loop: collect → store → sample → TD step, with periodic
// target sync and greedy evaluation. Writes metrics.jsonl, resolved_config
// and checkpoint.bin into cfg.out_dir. Deterministic for a fixed config.
TrainResult train(const RunConfig& cfg);

// ε after `env_steps` of linear annealing.
double epsilon_at(const TrainConfig& cfg, std::uint64_t env_steps);

}  // namespace mgan
