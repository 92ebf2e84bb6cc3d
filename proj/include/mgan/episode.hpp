#pragma once

#include <vector>

#include "mgan/env.hpp"
#include "mgan/model.hpp"
#include "mgan/rng.hpp"

namespace mgan {

// One complete episode: T+1 observation frames (the last one is the
// terminal frame) and T transition records.
struct Episode {
  // frames 0..T
  std::vector<std::vector<RealArray>> obs;                    // per frame, per agent
  std::vector<RealArray> state;                               // per frame
  std::vector<std::vector<std::uint8_t>> alive;               // per frame, per agent
  std::vector<std::vector<std::vector<std::uint8_t>>> avail;  // per frame, per agent, per action
  std::vector<std::vector<double>> agent_hp;                  // per frame, per agent
  // transitions 0..T-1
  std::vector<std::vector<int>> actions;  // per step, per agent
  std::vector<double> rewards;
  bool truncated = false;
  bool success = false;

  std::size_t length() const { return rewards.size(); }
  double total_return() const {
    double r = 0.0;
    for (double v : rewards) r += v;
    return r;
  }
};

// Runs one episode with ε-greedy action selection against frozen params.
// Hidden states start at zero; the environment is reset with `env_seed`.
Episode collect_episode(Env& env, const ModelSpec& model, const ParameterTree& params,
                        double epsilon, std::uint64_t env_seed, Rng& rng);

// Debug trace: one JSON line per step with actions, reward, alive mask and
// the terminal flags.
std::string episode_to_jsonl(const Episode& episode);

// FIFO ring of episodes with uniform sampling (without replacement).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  }

  void add(Episode episode);
  std::size_t size() const { return episodes_.size(); }
  const Episode& at(std::size_t i) const { return episodes_[i]; }

  std::vector<const Episode*> sample(std::size_t count, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;  // ring cursor once full
  std::vector<Episode> episodes_;
};

// Padded batch of episodes laid out for the batched recurrent forward:
// frame arrays hold B·n agent rows, transition arrays are per step.
struct EpisodeBatch {
  std::size_t n_episodes = 0;  // B
  std::size_t max_len = 0;     // T
  std::size_t n_agents = 0;
  std::size_t n_actions = 0;

  // frames 0..T
  std::vector<RealArray> inputs;     // [B·n × input_dim] agent-net inputs
  std::vector<RealArray> obs;        // [B·n × obs_dim] graph node features
  std::vector<RealArray> state;      // [B × state_dim]
  std::vector<RealArray> alive;      // [B × n] 0/1
  std::vector<RealArray> adjacency;  // {B,n,n}
  std::vector<std::vector<std::uint8_t>> avail;  // [(B·n) · n_actions] flattened

  // transitions 0..T-1
  std::vector<std::vector<std::size_t>> actions;  // [B·n] flattened action index
  std::vector<RealArray> reward;                  // [B]
  std::vector<RealArray> terminated;              // [B] 0/1
  std::vector<RealArray> filled;                  // [B] 0/1
  double total_filled = 0.0;

  static EpisodeBatch assemble(std::span<const Episode* const> episodes, const ModelSpec& model);
};

}  // namespace mgan
