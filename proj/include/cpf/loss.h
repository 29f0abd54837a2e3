#ifndef CPF_LOSS_H
#define CPF_LOSS_H

#include <span>
#include <vector>

#include "cpf/parameter.h"

namespace cpf {

struct LossBreakdown {
  double total = 0.0;
  double data_term = 0.0;  // mean BCE over valid pairs
  double l2_term = 0.0;
  long terms = 0;
};

/// Mean binary cross-entropy over mask-selected pairs plus an L2 penalty
/// over the parameters. Predictions are clamped to [1e-7, 1 - 1e-7] before
/// the logs. Pure evaluation; the training path computes the same quantity
/// through the tape.
LossBreakdown bce_loss(std::span<const double> predictions, std::span<const double> labels,
                       std::span<const uint8_t> mask,
                       std::span<const Parameter* const> params, double l2_lambda);

/// lambda * sum of squared parameter entries.
double l2_sum_squares(std::span<const Parameter* const> params, double l2_lambda);

/// Adds the exact penalty gradient 2 * lambda * theta to each parameter's
/// grad buffer.
void accumulate_l2_gradient(std::span<Parameter* const> params, double l2_lambda);

}  // namespace cpf

#endif
