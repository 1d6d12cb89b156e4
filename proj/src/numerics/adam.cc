#include "relparse/adam.h"

#include <cmath>

#include "relparse/errors.h"

namespace relparse {

void adam_step(ParamStore& params, AdamState& state, double lr) {
  for (const auto& [name, t] : params.all()) {
    if (!t.has_grad()) throw Error("adam_step: parameter has no gradient: " + name);
  }
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (const auto& [name, param] : params.all()) {
    Tensor p = param;  // handles share storage
    auto& m = state.first_moment[name];
    auto& v = state.second_moment[name];
    if (m.size() != p.size()) m.assign(p.size(), 0.0);
    if (v.size() != p.size()) v.assign(p.size(), 0.0);
    std::span<double> w = p.mutable_data();
    std::span<double> g = p.mutable_grad();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      w[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
      g[i] = 0.0;
    }
  }
}

}  // namespace relparse
