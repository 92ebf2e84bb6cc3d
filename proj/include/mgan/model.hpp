#pragma once

#include <string>

#include "mgan/agent.hpp"
#include "mgan/config.hpp"
#include "mgan/graph.hpp"
#include "mgan/mixer.hpp"

namespace mgan {

// Architecture description plus the forward passes shared by training,
// rollouts and analysis. The mixing head is selected by `algorithm`:
//   mgan — G attention graph encoders, credit softmax per graph, positive
//          hypernetwork combination
//   vdn  — plain sum of individual values
//   qmix — two-layer monotonic mixing network
struct ModelSpec {
  std::string algorithm = "mgan";
  std::size_t n_agents = 0;
  std::size_t n_actions = 0;
  std::size_t obs_dim = 0;
  std::size_t state_dim = 0;
  std::size_t hidden = 64;
  std::size_t emb_dim = 32;
  std::size_t n_graphs = 4;
  std::size_t qmix_embed = 32;

  static ModelSpec build(const std::string& algorithm, const EnvSpec& env,
                         const TrainConfig& train);

  std::size_t input_dim() const { return obs_dim + n_actions + n_agents; }

  AgentNet agent_net() const {
    return AgentNet{obs_dim, n_actions, n_agents, hidden};
  }
  GraphEncoder graph_encoder() const { return GraphEncoder{obs_dim, emb_dim}; }
  QmixHead qmix_head() const { return QmixHead{n_agents, state_dim, qmix_embed}; }

  ParameterTree init_params(Rng& rng) const;

  // Mixing head over one batch of timesteps. chosen_q [B×n], state [B×s],
  // obs_feats [B·n×obs_dim] (graph node features), adjacency {B,n,n},
  // alive {B,n}. Returns Q_tot [B].
  VarId mix(Tape& t, Binding& bind, VarId chosen_q, VarId state, VarId obs_feats,
            const RealArray& adjacency, const RealArray& alive) const;

  // One no-grad recurrent step for rollouts: inputs [n×input_dim],
  // h [n×hidden] -> q [n×n_actions] and the next hidden state.
  struct PolicyStep {
    RealArray q;
    RealArray h_next;
  };
  PolicyStep policy_step(const ParameterTree& params, const RealArray& inputs,
                         const RealArray& h) const;

  // No-grad graph-side outputs for one timestep (analysis export; mgan only):
  // per graph network the node embeddings, transform scalars and credit
  // weights over alive agents.
  struct GraphOutputs {
    std::vector<RealArray> embeddings;  // G × [n×emb_dim]
    std::vector<RealArray> scalars;     // G × [n]
    std::vector<RealArray> weights;     // G × [n]
  };
  GraphOutputs analyze_step(const ParameterTree& params, const RealArray& obs_feats,
                            std::span<const std::uint8_t> alive) const;
};

}  // namespace mgan
