#include "mgan/graph.hpp"

namespace mgan {

RealArray build_adjacency(std::span<const std::uint8_t> alive) {
  const std::size_t n = alive.size();
  RealArray adj({n, n});
  for (std::size_t u = 0; u < n; ++u) {
    if (!alive[u]) continue;
    for (std::size_t v = 0; v < n; ++v) {
      if (alive[v]) adj.at2(u, v) = 1.0;
    }
  }
  return adj;
}

RealArray build_adjacency_batch(const std::vector<std::vector<std::uint8_t>>& alive) {
  const std::size_t B = alive.size();
  const std::size_t n = alive.empty() ? 0 : alive[0].size();
  RealArray adj({B, n, n});
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t u = 0; u < n; ++u) {
      if (!alive[b][u]) continue;
      for (std::size_t v = 0; v < n; ++v) {
        if (alive[b][v]) adj.at3(b, u, v) = 1.0;
      }
    }
  }
  return adj;
}

namespace {

std::string layer_prefix(std::size_t index, std::size_t layer) {
  return "graph." + std::to_string(index) + ".l" + std::to_string(layer);
}

}  // namespace

void GraphEncoder::init_params(ParameterTree& params, Rng& rng, std::size_t index) const {
  init_affine(params, rng, layer_prefix(index, 1), emb_dim, 2 * in_dim);
  init_affine(params, rng, layer_prefix(index, 2), emb_dim, 2 * emb_dim);
}

void GraphEncoder::init_transform(ParameterTree& params, Rng& rng, std::size_t emb_dim) {
  init_affine(params, rng, "transform", 1, emb_dim);
}

VarId GraphEncoder::combine(Tape& t, Binding& bind, std::size_t index, std::size_t layer,
                            VarId aggregated, VarId original) const {
  VarId cat = concat_cols(t, aggregated, original);
  return relu(t, affine(t, bind, cat, layer_prefix(index, layer)));
}

std::pair<VarId, VarId> GraphEncoder::encode(Tape& t, Binding& bind, std::size_t index,
                                             VarId feats, const RealArray& adjacency) const {
  const std::size_t B = adjacency.dim(0);
  const std::size_t n = adjacency.dim(1);

  VarId a1 = attention_aggregate(t, feats, adjacency);
  VarId h1 = combine(t, bind, index, 1, a1, feats);
  VarId a2 = attention_aggregate(t, h1, adjacency);
  VarId h2 = combine(t, bind, index, 2, a2, h1);

  VarId c = reshape(t, affine(t, bind, h2, "transform"), {B, n});
  return {h2, c};
}

}  // namespace mgan
