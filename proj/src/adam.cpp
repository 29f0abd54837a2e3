#include "cpf/adam.h"

#include <cmath>

#include "cpf/error.h"

namespace cpf {

real_t clip_global_norm(std::span<Parameter* const> params, real_t max_norm) {
  real_t sq = 0.0;
  for (const Parameter* p : params) sq += p->grad.squared_norm();
  const real_t norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const real_t s = max_norm / norm;
    for (Parameter* p : params) {
      for (int i = 0; i < p->grad.size(); ++i) p->grad[i] *= s;
    }
  }
  return norm;
}

void AdamOptimizer::step(std::span<Parameter* const> params) {
  ++step_;
  const real_t bc1 = 1.0 - std::pow(config_.beta1, static_cast<real_t>(step_));
  const real_t bc2 = 1.0 - std::pow(config_.beta2, static_cast<real_t>(step_));
  for (Parameter* p : params) {
    if (!p->grad.all_finite()) {
      throw NumericError("non-finite gradient in parameter " + p->name);
    }
    for (int i = 0; i < p->value.size(); ++i) {
      const real_t g = p->grad[i];
      p->adam_m[i] = config_.beta1 * p->adam_m[i] + (1.0 - config_.beta1) * g;
      p->adam_v[i] = config_.beta2 * p->adam_v[i] + (1.0 - config_.beta2) * g * g;
      const real_t m_hat = p->adam_m[i] / bc1;
      const real_t v_hat = p->adam_v[i] / bc2;
      p->value[i] -= config_.lr * (m_hat / (std::sqrt(v_hat) + config_.eps) +
                                   config_.weight_decay * p->value[i]);
    }
  }
}

}  // namespace cpf
