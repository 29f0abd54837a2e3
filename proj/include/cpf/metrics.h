#ifndef CPF_METRICS_H
#define CPF_METRICS_H

#include <optional>
#include <span>

namespace cpf {

struct MetricsReport {
  std::optional<double> auc;  // absent when labels are one-class
  double acc = 0.0;
  double rmse = 0.0;
  std::optional<double> r2;   // absent when label variance is zero
  long n_predictions = 0;
};

/// Mann-Whitney rank AUC with average ranks for ties. Returns nullopt when
/// either class is empty.
std::optional<double> rank_auc(std::span<const double> scores, std::span<const int> labels);

/// Pooled metrics over prediction/label pairs: rank AUC, accuracy at the
/// 0.5 threshold, RMSE, and r^2 about the label mean.
MetricsReport compute_metrics(std::span<const double> predictions, std::span<const int> labels);

}  // namespace cpf

#endif
