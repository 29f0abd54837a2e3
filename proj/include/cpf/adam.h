#ifndef CPF_ADAM_H
#define CPF_ADAM_H

#include <span>

#include "cpf/parameter.h"

namespace cpf {

struct AdamConfig {
  real_t lr = 3e-3;
  real_t beta1 = 0.9;
  real_t beta2 = 0.999;
  real_t eps = 1e-8;
  /// Decoupled decay applied as theta -= lr * weight_decay * theta.
  real_t weight_decay = 0.0;
};

/// Rescale all gradients so their global L2 norm is at most max_norm.
/// Returns the pre-clip norm.
real_t clip_global_norm(std::span<Parameter* const> params, real_t max_norm);

/// Adam with bias correction. Deterministic: parameters are visited in the
/// order given, so two runs from identical state produce identical results.
class AdamOptimizer {
public:
  explicit AdamOptimizer(AdamConfig config = {}) : config_(config) {}

  /// One update from the gradients currently held by the parameters.
  /// Throws NumericError naming the parameter if a gradient is non-finite.
  void step(std::span<Parameter* const> params);

  long step_count() const { return step_; }
  void set_step_count(long t) { step_ = t; }
  const AdamConfig& config() const { return config_; }
  AdamConfig& config() { return config_; }

private:
  AdamConfig config_;
  long step_ = 0;
};

}  // namespace cpf

#endif
