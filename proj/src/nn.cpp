#include "mgan/nn.hpp"

#include <cmath>

namespace mgan {

namespace {

RealArray uniform_array(Rng& rng, Shape shape, double bound) {
  RealArray a(std::move(shape));
  for (std::size_t i = 0; i < a.numel(); ++i) a.at(i) = rng.uniform(-bound, bound);
  return a;
}

}  // namespace

void init_affine(ParameterTree& params, Rng& rng, const std::string& prefix, std::size_t out,
                 std::size_t in) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  params.add(prefix + ".weight", uniform_array(rng, {out, in}, bound));
  params.add(prefix + ".bias", uniform_array(rng, {out}, bound));
}

void init_gru(ParameterTree& params, Rng& rng, const std::string& prefix, std::size_t in,
              std::size_t hidden) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  params.add(prefix + ".w_ih", uniform_array(rng, {3 * hidden, in}, bound));
  params.add(prefix + ".w_hh", uniform_array(rng, {3 * hidden, hidden}, bound));
  params.add(prefix + ".b_ih", uniform_array(rng, {3 * hidden}, bound));
  params.add(prefix + ".b_hh", uniform_array(rng, {3 * hidden}, bound));
}

VarId affine(Tape& t, Binding& bind, VarId x, const std::string& prefix) {
  return linear(t, x, bind(prefix + ".weight"), bind(prefix + ".bias"));
}

VarId gru_cell(Tape& t, Binding& bind, VarId x, VarId h, const std::string& prefix) {
  const std::size_t hidden = t.value(h).cols();
  VarId gi = linear(t, x, bind(prefix + ".w_ih"), bind(prefix + ".b_ih"));
  VarId gh = linear(t, h, bind(prefix + ".w_hh"), bind(prefix + ".b_hh"));

  VarId r = sigmoid(t, add(t, slice_cols(t, gi, 0, hidden), slice_cols(t, gh, 0, hidden)));
  VarId z = sigmoid(
      t, add(t, slice_cols(t, gi, hidden, 2 * hidden), slice_cols(t, gh, hidden, 2 * hidden)));
  VarId c = tanh_op(t, add(t, slice_cols(t, gi, 2 * hidden, 3 * hidden),
                           mul(t, r, slice_cols(t, gh, 2 * hidden, 3 * hidden))));

  VarId one_minus_z = add_const(t, scale(t, z, -1.0), 1.0);
  return add(t, mul(t, one_minus_z, c), mul(t, z, h));
}

}  // namespace mgan
