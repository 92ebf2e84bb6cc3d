#pragma once

#include <cstdint>
#include <map>

#include "mgan/params.hpp"

namespace mgan {

// RMSProp with per-element squared-gradient moving averages.
struct OptimizerState {
  double learning_rate = 5e-4;
  double decay = 0.99;
  double epsilon = 1e-5;
  std::uint64_t step_count = 0;
  std::map<std::string, RealArray> square_avg;  // mirrors trainable param shapes
};

// One update over every trainable entry. Throws if a trainable parameter has
// no gradient in `grads`. Accumulators are created lazily and decayed even
// when the gradient is zero.
void optimizer_step(ParameterTree& params, const GradMap& grads, OptimizerState& state);

}  // namespace mgan
