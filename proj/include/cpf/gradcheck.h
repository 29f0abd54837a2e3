#ifndef CPF_GRADCHECK_H
#define CPF_GRADCHECK_H

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cpf/parameter.h"

namespace cpf {

struct BlockCheck {
  std::string name;
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
  int entries = 0;
  bool pass = true;
};

struct GradCheckReport {
  std::vector<BlockCheck> blocks;
  double worst_rel_err = 0.0;
  double h = 0.0;
  double tol = 0.0;
  bool pass = true;

  std::string to_string() const;
};

/// Compare analytic gradients against central finite differences.
///
/// loss_fn evaluates the loss at the current parameter values without side
/// effects; grad_fn recomputes the loss and leaves d(loss)/d(theta) in each
/// parameter's grad buffer. Every entry of every parameter is perturbed by
/// +/- h. Relative error uses a 1e-6 magnitude floor so that near-zero
/// gradient pairs compare absolutely.
GradCheckReport finite_diff_check(const std::function<double()>& loss_fn,
                                  const std::function<void()>& grad_fn,
                                  std::span<Parameter* const> params, double h, double tol);

}  // namespace cpf

#endif
