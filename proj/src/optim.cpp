#include "mgan/optim.hpp"

#include <cmath>

namespace mgan {

void optimizer_step(ParameterTree& params, const GradMap& grads, OptimizerState& state) {
  for (auto& [name, entry] : params) {
    if (!entry.trainable) continue;
    auto git = grads.find(name);
    if (git == grads.end()) {
      throw std::invalid_argument("optimizer_step: missing gradient for '" + name + "'");
    }
    const RealArray& g = git->second;
    require_same_shape(entry.value, g, "optimizer_step");

    auto [ait, created] = state.square_avg.try_emplace(name, RealArray(entry.value.shape()));
    RealArray& acc = ait->second;
    double* p = entry.value.data();
    double* a = acc.data();
    const double* gd = g.data();
    for (std::size_t i = 0; i < entry.value.numel(); ++i) {
      a[i] = state.decay * a[i] + (1.0 - state.decay) * gd[i] * gd[i];
      p[i] -= state.learning_rate * gd[i] / (std::sqrt(a[i]) + state.epsilon);
    }
    entry.value.require_finite(("optimizer_step: " + name).c_str());
  }
  ++state.step_count;
}

}  // namespace mgan
