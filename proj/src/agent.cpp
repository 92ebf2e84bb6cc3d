#include "mgan/agent.hpp"

namespace mgan {

void AgentNet::init_params(ParameterTree& params, Rng& rng) const {
  init_affine(params, rng, "agent.fc_in", hidden, input_dim());
  init_gru(params, rng, "agent.gru", hidden, hidden);
  init_affine(params, rng, "agent.head", n_actions, hidden);
}

std::pair<VarId, VarId> AgentNet::forward(Tape& t, Binding& bind, VarId input, VarId h) const {
  VarId x = relu(t, affine(t, bind, input, "agent.fc_in"));
  VarId h2 = gru_cell(t, bind, x, h, "agent.gru");
  VarId q = affine(t, bind, h2, "agent.head");
  return {q, h2};
}

RealArray build_agent_input(const AgentObservation& obs, int last_action, std::size_t n_actions,
                            std::size_t n_agents) {
  const std::size_t obs_dim = obs.features.numel();
  RealArray input({obs_dim + n_actions + n_agents});
  for (std::size_t i = 0; i < obs_dim; ++i) input.at(i) = obs.features.at(i);
  if (last_action >= 0) input.at(obs_dim + static_cast<std::size_t>(last_action)) = 1.0;
  input.at(obs_dim + n_actions + static_cast<std::size_t>(obs.agent_id)) = 1.0;
  return input;
}

int select_action(const RealArray& q, std::span<const std::uint8_t> avail, double epsilon,
                  Rng& rng) {
  std::size_t n_avail = 0;
  for (auto a : avail) n_avail += a != 0;
  if (n_avail == 0) throw std::invalid_argument("select_action: no available action");

  if (epsilon > 0.0 && rng.uniform() < epsilon) {
    int pick = rng.uniform_int(0, static_cast<int>(n_avail) - 1);
    for (std::size_t i = 0; i < avail.size(); ++i) {
      if (avail[i] && pick-- == 0) return static_cast<int>(i);
    }
  }
  return static_cast<int>(argmax_available(q.values(), avail));
}

}  // namespace mgan
