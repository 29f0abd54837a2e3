#ifndef CPF_CROSS_VALIDATION_H
#define CPF_CROSS_VALIDATION_H

#include <map>
#include <string>
#include <vector>

#include "cpf/cpf_model.h"
#include "cpf/trainer.h"

namespace cpf {

/// Fill dataset-derived model fields (exercise/concept counts, feature
/// vocabularies) from the meta block.
ModelConfig config_for_dataset(ModelConfig base, const DatasetMeta& meta);

/// One fold's windows with fold-local statistics applied: difficulty
/// buckets and the prerequisite graph are computed from the training
/// students only, so validation and test records never leak in.
struct FoldData {
  std::vector<StudentSequence> train;
  std::vector<StudentSequence> val;
  std::vector<StudentSequence> test;
  PMatrix p;
};

FoldData prepare_fold(const Dataset& ds, const FoldSplit& split, const ModelConfig& config);

struct FoldOutcome {
  int fold = 0;
  int best_epoch = -1;
  MetricsReport test;
  std::vector<EpochLog> epochs;
};

struct CvResult {
  std::vector<FoldOutcome> folds;
  MetricsReport mean;
};

CvResult cross_validate(const Dataset& ds, const ModelConfig& base, const TrainConfig& tc,
                        int n_folds = 5);

/// Cross-validation repeated over a grid of review-window sizes.
std::map<int, CvResult> k_window_sweep(const Dataset& ds, const ModelConfig& base,
                                       const TrainConfig& tc, const std::vector<int>& k_grid,
                                       int n_folds = 5);

/// JSON lines {fold, epoch, auc, acc, rmse, r2}; validation rows per epoch,
/// one test row per fold (epoch = best), and a mean row with fold = -1.
void write_cv_metrics_json(const CvResult& cv, const std::string& path);

/// Comparison table, metrics as rows and one column per review-window K.
void write_k_sensitivity_csv(const std::map<int, CvResult>& sweep, const std::string& path);
void write_k_sensitivity_json(const std::map<int, CvResult>& sweep, const std::string& path);

}  // namespace cpf

#endif
