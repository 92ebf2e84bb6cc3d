#pragma once

#include <string>

#include "mgan/rng.hpp"
#include "mgan/tape.hpp"

namespace mgan {

// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) affine layer `prefix.weight`
// [out×in] and `prefix.bias` [out].
void init_affine(ParameterTree& params, Rng& rng, const std::string& prefix, std::size_t out,
                 std::size_t in);

// Packed GRU parameters under `prefix`: w_ih [3H×in], w_hh [3H×H], b_ih [3H],
// b_hh [3H]; gate rows ordered reset, update, candidate.
void init_gru(ParameterTree& params, Rng& rng, const std::string& prefix, std::size_t in,
              std::size_t hidden);

// y = x·Wᵀ+b through named parameters.
VarId affine(Tape& t, Binding& bind, VarId x, const std::string& prefix);

// One GRU step: x [r×in], h [r×H] -> h' [r×H].
//   r = sigmoid(x·Wirᵀ + bir + h·Whrᵀ + bhr)
//   z = sigmoid(x·Wizᵀ + biz + h·Whzᵀ + bhz)
//   c = tanh(x·Winᵀ + bin + r ∘ (h·Whnᵀ + bhn))
//   h' = (1-z) ∘ c + z ∘ h
VarId gru_cell(Tape& t, Binding& bind, VarId x, VarId h, const std::string& prefix);

}  // namespace mgan
