#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mgan/nn.hpp"

namespace mgan {

// Agent graph for one timestep: symmetric 0/1 adjacency over agents plus
// per-node features (the local observations).
struct AgentGraph {
  RealArray adjacency;      // {n,n}
  RealArray node_features;  // [n×obs_dim]
};

// adjacency[u][v] = 1 iff both u and v are alive; self-loops included for
// alive agents, which keeps the attention softmax defined for an isolated
// alive node.
RealArray build_adjacency(std::span<const std::uint8_t> alive);

// Batched form: one {B,n,n} block per episode in the batch.
RealArray build_adjacency_batch(const std::vector<std::vector<std::uint8_t>>& alive);

// One attention-aggregator graph convolutional encoder. The G encoders have
// disjoint parameters graph.{index}.* except the transform affine, which is
// the single shared entry pair transform.{weight,bias}.
struct GraphEncoder {
  std::size_t in_dim = 0;
  std::size_t emb_dim = 32;

  void init_params(ParameterTree& params, Rng& rng, std::size_t index) const;
  static void init_transform(ParameterTree& params, Rng& rng, std::size_t emb_dim);

  // ReLU(MLP(CONCAT(aggregated, original))), MLP shared across nodes.
  VarId combine(Tape& t, Binding& bind, std::size_t index, std::size_t layer, VarId aggregated,
                VarId original) const;

  // Two aggregate+combine layers then the shared affine to a scalar per node.
  // feats [B·n×in_dim], adjacency {B,n,n} -> (embeddings [B·n×emb_dim],
  // scalars [B×n]).
  std::pair<VarId, VarId> encode(Tape& t, Binding& bind, std::size_t index, VarId feats,
                                 const RealArray& adjacency) const;
};

// Per-graph-network outputs for one batch of graphs.
struct EmbeddingSet {
  std::vector<VarId> embeddings;  // G × [B·n×emb_dim]
  std::vector<VarId> scalars;     // G × [B×n]
};

}  // namespace mgan
