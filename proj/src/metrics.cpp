#include "cpf/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "cpf/error.h"

namespace cpf {

std::optional<double> rank_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw DimensionError("rank_auc: score/label length mismatch");
  }
  const size_t n = scores.size();
  long n_pos = 0;
  for (int l : labels) n_pos += l;
  const long n_neg = static_cast<long>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  // Sum of positive ranks with tie groups sharing the average rank.
  double pos_rank_sum = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j + 1);
    for (size_t t = i; t <= j; ++t) {
      if (labels[order[t]] == 1) pos_rank_sum += avg_rank;
    }
    i = j + 1;
  }
  const double u = pos_rank_sum - 0.5 * static_cast<double>(n_pos) * (n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

MetricsReport compute_metrics(std::span<const double> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw DimensionError("compute_metrics: prediction/label length mismatch");
  }
  MetricsReport report;
  report.n_predictions = static_cast<long>(predictions.size());
  if (predictions.empty()) return report;

  report.auc = rank_auc(predictions, labels);

  double sq_err = 0.0;
  long correct_calls = 0;
  double label_mean = 0.0;
  for (size_t i = 0; i < predictions.size(); ++i) {
    const double diff = predictions[i] - labels[i];
    sq_err += diff * diff;
    const int call = predictions[i] > 0.5 ? 1 : 0;
    correct_calls += (call == labels[i]);
    label_mean += labels[i];
  }
  const double n = static_cast<double>(predictions.size());
  label_mean /= n;
  report.acc = static_cast<double>(correct_calls) / n;
  report.rmse = std::sqrt(sq_err / n);

  double ss_tot = 0.0;
  for (size_t i = 0; i < labels.size(); ++i) {
    const double d = labels[i] - label_mean;
    ss_tot += d * d;
  }
  if (ss_tot > 0.0) report.r2 = 1.0 - sq_err / ss_tot;
  return report;
}

}  // namespace cpf
