#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mgan/nn.hpp"

namespace mgan {

struct AgentObservation {
  RealArray features;                // [obs_dim]
  std::vector<std::uint8_t> avail;   // per action
  int agent_id = 0;
};

// GRU hidden state; zeroed at episode start.
struct RecurrentState {
  RealArray h;
  static RecurrentState initial(std::size_t rows, std::size_t hidden) {
    return RecurrentState{RealArray({rows, hidden})};
  }
};

// Shared recurrent Q-network evaluated by every agent. Distinct behaviour
// comes only from the input: [obs ‖ last-action one-hot ‖ agent-id one-hot].
struct AgentNet {
  std::size_t obs_dim = 0;
  std::size_t n_actions = 0;
  std::size_t n_agents = 0;
  std::size_t hidden = 64;

  std::size_t input_dim() const { return obs_dim + n_actions + n_agents; }

  void init_params(ParameterTree& params, Rng& rng) const;

  // input [r×input_dim], h [r×hidden] -> (q [r×n_actions], h')
  std::pair<VarId, VarId> forward(Tape& t, Binding& bind, VarId input, VarId h) const;
};

// [obs ‖ last_action ‖ id one-hot]; pass last_action = -1 at t=0.
RealArray build_agent_input(const AgentObservation& obs, int last_action, std::size_t n_actions,
                            std::size_t n_agents);

// ε-greedy over available actions; greedy ties go to the lowest index.
int select_action(const RealArray& q, std::span<const std::uint8_t> avail, double epsilon,
                  Rng& rng);

}  // namespace mgan
