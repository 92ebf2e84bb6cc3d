#include "mgan/mixer.hpp"

namespace mgan {

VarId graph_value(Tape& t, VarId chosen_q, VarId c_g, const RealArray& alive) {
  if (t.value(c_g).rank() == 1) {
    // Single instance: an all-dead mask is a caller error here.
    VarId w = masked_softmax(t, c_g, alive, /*allow_empty_rows=*/false);
    return sum_all(t, mul(t, chosen_q, w));
  }
  // Batched: padding rows may be all-dead and contribute zero.
  VarId w = masked_softmax(t, c_g, alive, /*allow_empty_rows=*/true);
  return row_sum(t, mul(t, chosen_q, w));
}

VarId hyper_mix(Tape& t, Binding& bind, VarId state, VarId q_graphs) {
  const std::size_t B = t.value(q_graphs).rows();
  VarId w = abs_op(t, affine(t, bind, state, "mixer.hyper_w"));
  VarId combined = row_sum(t, mul(t, w, q_graphs));
  VarId bias = reshape(t, affine(t, bind, state, "mixer.hyper_b"), {B});
  return add(t, combined, bias);
}

VarId mgan_qtot(Tape& t, Binding& bind, VarId chosen_q, std::span<const VarId> graph_scalars,
                VarId state, const RealArray& alive) {
  std::vector<VarId> q_g;
  q_g.reserve(graph_scalars.size());
  for (VarId c : graph_scalars) q_g.push_back(graph_value(t, chosen_q, c, alive));
  VarId q_graphs = stack_cols(t, q_g);
  return hyper_mix(t, bind, state, q_graphs);
}

void init_mgan_mixer(ParameterTree& params, Rng& rng, std::size_t state_dim,
                     std::size_t n_graphs) {
  init_affine(params, rng, "mixer.hyper_w", n_graphs, state_dim);
  init_affine(params, rng, "mixer.hyper_b", 1, state_dim);
}

VarId vdn_mix(Tape& t, VarId chosen_q) { return row_sum(t, chosen_q); }

void QmixHead::init_params(ParameterTree& params, Rng& rng) const {
  init_affine(params, rng, "qmix.hyper_w1", n_agents * embed, state_dim);
  init_affine(params, rng, "qmix.hyper_b1", embed, state_dim);
  init_affine(params, rng, "qmix.hyper_w2", embed, state_dim);
  init_affine(params, rng, "qmix.v", 1, state_dim);
}

VarId QmixHead::mix(Tape& t, Binding& bind, VarId chosen_q, VarId state) const {
  const std::size_t B = t.value(chosen_q).rows();

  VarId w1 = abs_op(t, affine(t, bind, state, "qmix.hyper_w1"));  // [B × n·embed]
  VarId b1 = affine(t, bind, state, "qmix.hyper_b1");             // [B × embed]

  std::vector<VarId> hidden_cols;
  hidden_cols.reserve(embed);
  for (std::size_t e = 0; e < embed; ++e) {
    VarId we = slice_cols(t, w1, e * n_agents, (e + 1) * n_agents);
    VarId pre = row_sum(t, mul(t, we, chosen_q));
    VarId be = reshape(t, slice_cols(t, b1, e, e + 1), {B});
    hidden_cols.push_back(add(t, pre, be));
  }
  VarId hidden = elu(t, stack_cols(t, hidden_cols));  // [B × embed]

  VarId w2 = abs_op(t, affine(t, bind, state, "qmix.hyper_w2"));
  VarId out = row_sum(t, mul(t, w2, hidden));
  VarId v = reshape(t, affine(t, bind, state, "qmix.v"), {B});
  return add(t, out, v);
}

}  // namespace mgan
