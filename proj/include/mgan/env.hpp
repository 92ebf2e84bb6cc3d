#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mgan/array.hpp"

namespace mgan {

struct EnvSpec {
  std::string name;
  int n_agents = 0;
  int n_actions = 0;
  int obs_dim = 0;
  int state_dim = 0;
  int horizon = 1;
  std::string success_rule;
};

struct StepResult {
  std::vector<RealArray> obs;                     // per agent, [obs_dim]
  RealArray state;                                // [state_dim]
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;  // horizon cutoff; still terminal
  bool success = false;
  std::vector<std::uint8_t> alive;                // per agent
  std::vector<std::vector<std::uint8_t>> avail;   // per agent, per action
  std::vector<double> agent_hp;                   // normalized; 0/1 liveness if no HP notion
};

// Cooperative Dec-POMDP environment: shared reward, per-agent partial
// observations, global state for centralized training. Deterministic given
// the reset seed; stepping a finished episode is an error.
class Env {
 public:
  virtual ~Env() = default;
  virtual const EnvSpec& spec() const = 0;
  virtual StepResult reset(std::uint64_t seed) = 0;
  virtual StepResult step(std::span<const int> actions) = 0;
  virtual std::unique_ptr<Env> clone() const = 0;
};

using EnvParams = std::map<std::string, std::string>;

// Payoff-table game: both agents pick simultaneously, reward from the table,
// one step. Success iff the reward equals the table maximum.
std::unique_ptr<Env> make_matrix_game(const std::vector<std::vector<double>>& payoff);

// Two-step branching game: step 1 agent 0 picks branch A/B for zero reward;
// step 2 pays from the branch table (A: all 7, B: [[0,1],[1,8]]).
std::unique_ptr<Env> make_two_step_game();

struct SkirmishConfig {
  int width = 7;
  int height = 5;
  int n_allies = 5;
  int n_enemies = 3;
  int ally_hp = 4;
  int enemy_hp = 2;
  int ally_damage = 1;
  int enemy_damage = 1;
  int attack_range = 2;
  int sight_range = 8;
  int horizon = 30;
};

// Grid combat against scripted enemies; exercises agent death so the
// alive-mask adjacency actually changes within episodes.
std::unique_ptr<Env> make_skirmish(const SkirmishConfig& cfg);

// Registry used by config files and the CLI: "matrix", "two_step",
// "skirmish". Unknown keys raise ConfigError (see config.hpp). Returns the
// env plus its fully resolved parameter map.
std::unique_ptr<Env> make_env(const std::string& name, const EnvParams& params,
                              EnvParams* resolved = nullptr);

// Exact optimal expected return by exhaustive enumeration of open-loop joint
// action sequences; valid for the deterministic bundled envs. Throws when
// the search would exceed `max_expansions`.
double brute_force_optimal(const Env& env, std::uint64_t seed = 0,
                           std::uint64_t max_expansions = 1'000'000);

}  // namespace mgan
