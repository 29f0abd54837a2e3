#include "cpf/loss.h"

#include <algorithm>
#include <cmath>

#include "cpf/error.h"

namespace cpf {

namespace {
constexpr double kClamp = 1e-7;
}

LossBreakdown bce_loss(std::span<const double> predictions, std::span<const double> labels,
                       std::span<const uint8_t> mask,
                       std::span<const Parameter* const> params, double l2_lambda) {
  if (predictions.size() != labels.size() ||
      (!mask.empty() && mask.size() != predictions.size())) {
    throw DimensionError("bce_loss: prediction/label/mask length mismatch");
  }
  LossBreakdown out;
  double sum = 0.0;
  for (size_t i = 0; i < predictions.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    const double y = std::clamp(predictions[i], kClamp, 1.0 - kClamp);
    sum += -(labels[i] * std::log(y) + (1.0 - labels[i]) * std::log(1.0 - y));
    ++out.terms;
  }
  out.data_term = out.terms > 0 ? sum / static_cast<double>(out.terms) : 0.0;
  out.l2_term = l2_sum_squares(params, l2_lambda);
  out.total = out.data_term + out.l2_term;
  return out;
}

double l2_sum_squares(std::span<const Parameter* const> params, double l2_lambda) {
  if (l2_lambda == 0.0) return 0.0;
  double sq = 0.0;
  for (const Parameter* p : params) sq += p->value.squared_norm();
  return l2_lambda * sq;
}

void accumulate_l2_gradient(std::span<Parameter* const> params, double l2_lambda) {
  if (l2_lambda == 0.0) return;
  for (Parameter* p : params) {
    for (int i = 0; i < p->value.size(); ++i) {
      p->grad[i] += 2.0 * l2_lambda * p->value[i];
    }
  }
}

}  // namespace cpf
