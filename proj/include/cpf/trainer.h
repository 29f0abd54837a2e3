#ifndef CPF_TRAINER_H
#define CPF_TRAINER_H

#include <span>
#include <vector>

#include "cpf/cpf_model.h"
#include "cpf/metrics.h"

namespace cpf {

struct TrainConfig {
  double lr = 3e-3;
  int batch_size = 128;
  int epochs = 100;
  double l2_lambda = 1e-5;
  double clip_norm = 5.0;
  int patience = 10;  // epochs without validation improvement before stopping
  uint64_t seed = 1;
  bool verbose = false;  // progress lines on stderr
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  MetricsReport val;
};

struct TrainResult {
  std::vector<EpochLog> log;
  int best_epoch = -1;
  MetricsReport best_val;
  long adam_steps = 0;
};

/// Mini-batch Adam over shuffled training windows; the batch loss is the
/// mean BCE over all valid predictions in the batch plus the L2 penalty,
/// whose gradient is added in closed form. Keeps the parameters from the
/// epoch with the best validation AUC. Deterministic for a fixed seed.
TrainResult train(CpfModel& model, std::span<const StudentSequence> train_windows,
                  std::span<const StudentSequence> val_windows, const TrainConfig& config);

/// Eval-mode predictions pooled over all windows.
void predict_all(const CpfModel& model, std::span<const StudentSequence> windows,
                 std::vector<double>& predictions, std::vector<int>& labels);

MetricsReport evaluate(const CpfModel& model, std::span<const StudentSequence> windows);

}  // namespace cpf

#endif
