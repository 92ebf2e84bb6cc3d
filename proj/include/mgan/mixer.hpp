#pragma once

#include <span>

#include "mgan/nn.hpp"

namespace mgan {

// Per-graph credit combination, batched over episodes:
//   Q_g[b] = Σ_a chosen_q[b][a] · softmax_alive(c_g[b])[a]
// Dead agents get exactly zero weight; rows with no alive agent (padding)
// come out zero.
VarId graph_value(Tape& t, VarId chosen_q, VarId c_g, const RealArray& alive);

// State-conditioned positive linear combination:
//   Q_tot[b] = Σ_g |W_w·s + b_w|_g · q_graphs[b][g] + (W_b·s + b_b)
// Parameters live under mixer.hyper_w / mixer.hyper_b.
VarId hyper_mix(Tape& t, Binding& bind, VarId state, VarId q_graphs);

// Full mixing head: per-graph credit softmax then the hypernetwork
// combination. chosen_q [B×n], scalars per graph [B×n], state [B×s].
VarId mgan_qtot(Tape& t, Binding& bind, VarId chosen_q, std::span<const VarId> graph_scalars,
                VarId state, const RealArray& alive);

void init_mgan_mixer(ParameterTree& params, Rng& rng, std::size_t state_dim, std::size_t n_graphs);

// Baselines. VDN: plain sum of individual values.
VarId vdn_mix(Tape& t, VarId chosen_q);

// QMIX: two-layer mixing net with hypernetwork-generated absolute-value
// weights, ELU on the hidden layer.
struct QmixHead {
  std::size_t n_agents = 0;
  std::size_t state_dim = 0;
  std::size_t embed = 32;

  void init_params(ParameterTree& params, Rng& rng) const;
  VarId mix(Tape& t, Binding& bind, VarId chosen_q, VarId state) const;
};

}  // namespace mgan
