#include "mgan/learner.hpp"

#include <fstream>

#include "mgan/io.hpp"

namespace mgan {

std::vector<VarId> batched_qtot_forward(Tape& t, Binding& bind, const ModelSpec& model,
                                        const EpisodeBatch& batch, bool greedy) {
  const std::size_t B = batch.n_episodes;
  const std::size_t n = batch.n_agents;
  const std::size_t U = batch.n_actions;
  const std::size_t frames = greedy ? batch.max_len + 1 : batch.max_len;
  const AgentNet agent = model.agent_net();

  std::vector<VarId> qtot;
  qtot.reserve(frames);
  VarId h = t.leaf(RealArray({B * n, model.hidden}));
  for (std::size_t f = 0; f < frames; ++f) {
    auto [q_all, h_next] = agent.forward(t, bind, t.leaf(batch.inputs[f]), h);
    h = h_next;

    std::vector<std::size_t> chosen(B * n);
    if (greedy) {
      const RealArray& q_vals = t.value(q_all);
      for (std::size_t r = 0; r < B * n; ++r) {
        chosen[r] = argmax_available(
            std::span<const double>(q_vals.data() + r * U, U),
            std::span<const std::uint8_t>(batch.avail[f].data() + r * U, U));
      }
    } else {
      chosen = batch.actions[f];
    }

    VarId chosen_q = reshape(t, gather_cols(t, q_all, std::move(chosen)), {B, n});
    qtot.push_back(model.mix(t, bind, chosen_q, t.leaf(batch.state[f]),
                             t.leaf(batch.obs[f]), batch.adjacency[f], batch.alive[f]));
  }
  return qtot;
}

std::vector<RealArray> td_targets(const EpisodeBatch& batch, const ModelSpec& model,
                                  const ParameterTree& target_params, double gamma) {
  Tape t(/*grad_enabled=*/false);
  Binding bind(t, target_params);
  std::vector<VarId> qtot = batched_qtot_forward(t, bind, model, batch, /*greedy=*/true);

  std::vector<RealArray> targets;
  targets.reserve(batch.max_len);
  for (std::size_t step = 0; step < batch.max_len; ++step) {
    RealArray y({batch.n_episodes});
    const RealArray& next_q = t.value(qtot[step + 1]);
    for (std::size_t b = 0; b < batch.n_episodes; ++b) {
      if (batch.filled[step].at(b) == 0.0) continue;
      const double bootstrap = batch.terminated[step].at(b) != 0.0 ? 0.0 : next_q.at(b);
      y.at(b) = batch.reward[step].at(b) + gamma * bootstrap;
    }
    targets.push_back(std::move(y));
  }
  return targets;
}

VarId td_loss(Tape& t, Binding& bind, const ModelSpec& model, const EpisodeBatch& batch,
              const std::vector<RealArray>& targets) {
  if (batch.total_filled <= 0.0) throw std::invalid_argument("td_loss: empty batch");
  std::vector<VarId> qtot = batched_qtot_forward(t, bind, model, batch, /*greedy=*/false);

  VarId total = t.leaf(RealArray::scalar(0.0));
  for (std::size_t step = 0; step < batch.max_len; ++step) {
    VarId err = sub(t, qtot[step], t.leaf(targets[step]));
    RealArray w(batch.filled[step].shape());
    for (std::size_t b = 0; b < w.numel(); ++b) {
      w.at(b) = batch.filled[step].at(b) / batch.total_filled;
    }
    total = add(t, total, weighted_sum(t, mul(t, err, err), std::move(w)));
  }
  return total;
}

EvalStats evaluate(Env& env, const ModelSpec& model, const ParameterTree& params,
                   std::uint64_t episodes, std::uint64_t seed,
                   std::vector<Episode>* out_episodes) {
  if (episodes == 0) throw std::invalid_argument("evaluate: episode count must be positive");
  EvalStats stats;
  stats.episodes = episodes;
  Rng rng(Rng::derive(seed, 0xe7a1));
  for (std::uint64_t e = 0; e < episodes; ++e) {
    Episode ep = collect_episode(env, model, params, /*epsilon=*/0.0,
                                 Rng::derive(seed, 1000 + e), rng);
    stats.mean_return += ep.total_return();
    stats.win_rate += ep.success ? 1.0 : 0.0;
    if (out_episodes) out_episodes->push_back(std::move(ep));
  }
  stats.mean_return /= static_cast<double>(episodes);
  stats.win_rate /= static_cast<double>(episodes);
  return stats;
}

double epsilon_at(const TrainConfig& cfg, std::uint64_t env_steps) {
  if (cfg.epsilon_anneal_steps == 0 || env_steps >= cfg.epsilon_anneal_steps) {
    return cfg.epsilon_end;
  }
  const double frac = static_cast<double>(env_steps) /
                      static_cast<double>(cfg.epsilon_anneal_steps);
  return cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac;
}

namespace {

std::string metrics_line(std::uint64_t step, const EvalStats& stats, double loss_ma,
                         double epsilon) {
  std::string line = "{\"step\": " + std::to_string(step);
  line += ", \"mean_return\": " + format_double(stats.mean_return);
  line += ", \"win_rate\": " + format_double(stats.win_rate);
  line += ", \"loss_ma\": " + format_double(loss_ma);
  line += ", \"epsilon\": " + format_double(epsilon);
  line += "}\n";
  return line;
}

}  // namespace

TrainResult train(const RunConfig& cfg) {
  const TrainConfig& tc = cfg.train;

  RunConfig resolved_cfg = cfg;
  std::unique_ptr<Env> env = make_env_from(cfg, &resolved_cfg.env_params);
  std::unique_ptr<Env> eval_env = env->clone();
  const ModelSpec model = ModelSpec::build(cfg.algorithm, env->spec(), tc);
  const std::string resolved_text = serialize_run_config(resolved_cfg);

  std::filesystem::path out_dir = cfg.out_dir.empty() ? std::filesystem::path(".")
                                                      : std::filesystem::path(cfg.out_dir);
  std::filesystem::create_directories(out_dir);
  write_text_file(out_dir / "resolved_config", resolved_text);

  Rng init_rng(cfg.seed);
  ParameterTree params = model.init_params(init_rng);
  ParameterTree target_params = params;
  OptimizerState opt;
  opt.learning_rate = tc.learning_rate;
  opt.decay = tc.rms_decay;
  opt.epsilon = tc.rms_epsilon;

  ReplayBuffer buffer(tc.buffer_capacity);
  Rng action_rng(Rng::derive(cfg.seed, 1));
  Rng sample_rng(Rng::derive(cfg.seed, 2));

  std::ofstream metrics(out_dir / "metrics.jsonl", std::ios::binary | std::ios::trunc);
  if (!metrics) throw std::runtime_error("cannot write metrics in " + out_dir.string());

  TrainResult result;
  result.model = model;
  result.out_dir = out_dir;
  result.metrics_path = out_dir / "metrics.jsonl";
  result.checkpoint_path = out_dir / "checkpoint.bin";

  std::uint64_t env_steps = 0;
  std::uint64_t train_steps = 0;
  std::uint64_t episode_index = 0;
  std::uint64_t next_eval = 0;
  std::uint64_t last_eval_at = std::uint64_t(-1);
  double loss_accum = 0.0;
  std::uint64_t loss_count = 0;
  bool stop = false;

  auto run_eval = [&]() {
    EvalStats stats = evaluate(*eval_env, model, params,
                               std::max<std::uint64_t>(1, tc.eval_episodes),
                               Rng::derive(cfg.seed, 3000 + env_steps));
    const double loss_ma = loss_count ? loss_accum / static_cast<double>(loss_count) : 0.0;
    metrics << metrics_line(env_steps, stats, loss_ma, epsilon_at(tc, env_steps));
    metrics.flush();
    loss_accum = 0.0;
    loss_count = 0;
    last_eval_at = env_steps;
    save_checkpoint(result.checkpoint_path, params, &opt, resolved_text);
    result.final_eval = stats;
    if (tc.early_stop_return && stats.mean_return >= *tc.early_stop_return) stop = true;
    if (tc.early_stop_win_rate && stats.win_rate >= *tc.early_stop_win_rate) stop = true;
    return stats;
  };

  while (env_steps < tc.total_env_steps && !stop) {
    if (env_steps >= next_eval) {
      run_eval();
      next_eval += std::max<std::uint64_t>(1, tc.eval_interval);
      if (stop) break;
    }

    Episode ep = collect_episode(*env, model, params, epsilon_at(tc, env_steps),
                                 Rng::derive(cfg.seed, 10'000 + episode_index), action_rng);
    env_steps += ep.length();
    ++episode_index;
    buffer.add(std::move(ep));

    if (buffer.size() >= tc.batch_size && episode_index % tc.train_interval_episodes == 0) {
      auto sampled = buffer.sample(tc.batch_size, sample_rng);
      EpisodeBatch batch = EpisodeBatch::assemble(sampled, model);
      std::vector<RealArray> targets = td_targets(batch, model, target_params, tc.gamma);

      Tape tape(/*grad_enabled=*/true);
      Binding bind(tape, params);
      VarId loss = td_loss(tape, bind, model, batch, targets);
      loss_accum += tape.value(loss).at(0);
      ++loss_count;
      GradMap grads = tape.backward(loss, &params);
      optimizer_step(params, grads, opt);
      ++train_steps;

      if (train_steps % tc.target_update_interval == 0) target_params = params;
    }
  }

  // Final evaluation + checkpoint unless one just ran at this step count.
  if (last_eval_at != env_steps) run_eval();

  result.params = std::move(params);
  result.optimizer = std::move(opt);
  result.env_steps = env_steps;
  result.train_steps = train_steps;
  return result;
}

}  // namespace mgan
