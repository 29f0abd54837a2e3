#include "cpf/cross_validation.h"

#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "cpf/config_json.h"
#include "cpf/csv.h"
#include "cpf/error.h"

namespace cpf {

using nlohmann::json;

ModelConfig config_for_dataset(ModelConfig base, const DatasetMeta& meta) {
  base.n_exercises = meta.num_exercises();
  base.k_concepts = meta.num_concepts();
  base.answer_time_vocab = meta.disc.answer_vocab();
  base.interval_time_vocab = meta.disc.interval_vocab();
  base.difficulty_buckets = meta.disc.difficulty_buckets;
  base.accuracy_buckets = meta.disc.accuracy_buckets;
  return base;
}

FoldData prepare_fold(const Dataset& ds, const FoldSplit& split, const ModelConfig& config) {
  FoldData fold;
  std::unordered_set<int> train_set(split.train.begin(), split.train.end());
  std::unordered_set<int> val_set(split.val.begin(), split.val.end());
  std::unordered_set<int> test_set(split.test.begin(), split.test.end());
  for (const StudentSequence& w : ds.windows) {
    if (train_set.count(w.student)) {
      fold.train.push_back(w);
    } else if (val_set.count(w.student)) {
      fold.val.push_back(w);
    } else if (test_set.count(w.student)) {
      fold.test.push_back(w);
    }
  }
  const DifficultyTable difficulty = compute_exercise_difficulty(
      fold.train, ds.meta.num_exercises(), ds.meta.disc.difficulty_buckets);
  apply_difficulty(fold.train, difficulty);
  apply_difficulty(fold.val, difficulty);
  apply_difficulty(fold.test, difficulty);

  if (config.mode == ModelMode::kCpf && config.ablation != Ablation::kNoPMatrix) {
    const auto streams = streams_from_windows(fold.train);
    fold.p = build_concept_graph(streams, ds.meta.num_concepts()).p;
  } else {
    fold.p = PMatrix::empty(ds.meta.num_concepts());
  }
  return fold;
}

CvResult cross_validate(const Dataset& ds, const ModelConfig& base, const TrainConfig& tc,
                        int n_folds) {
  const ModelConfig config = config_for_dataset(base, ds.meta);
  const auto splits = kfold(ds.meta.num_students(), n_folds, tc.seed);
  CvResult cv;
  double acc_sum = 0.0, rmse_sum = 0.0, auc_sum = 0.0, r2_sum = 0.0;
  long auc_n = 0, r2_n = 0, pred_n = 0;
  for (int f = 0; f < n_folds; ++f) {
    FoldData fold = prepare_fold(ds, splits[static_cast<size_t>(f)], config);
    CpfModel model(config, ds.meta.exercise_concept, fold.p,
                   tc.seed + static_cast<uint64_t>(f) * 7919);
    TrainConfig fold_tc = tc;
    fold_tc.seed = tc.seed + static_cast<uint64_t>(f);
    TrainResult tr;
    try {
      tr = train(model, fold.train, fold.val, fold_tc);
    } catch (const std::exception& e) {
      throw NumericError("fold " + std::to_string(f) + ": " + e.what());
    }
    FoldOutcome outcome;
    outcome.fold = f;
    outcome.best_epoch = tr.best_epoch;
    outcome.epochs = tr.log;
    outcome.test = evaluate(model, fold.test);
    acc_sum += outcome.test.acc;
    rmse_sum += outcome.test.rmse;
    pred_n += outcome.test.n_predictions;
    if (outcome.test.auc) {
      auc_sum += *outcome.test.auc;
      ++auc_n;
    }
    if (outcome.test.r2) {
      r2_sum += *outcome.test.r2;
      ++r2_n;
    }
    cv.folds.push_back(std::move(outcome));
  }
  const double nf = static_cast<double>(n_folds);
  cv.mean.acc = acc_sum / nf;
  cv.mean.rmse = rmse_sum / nf;
  cv.mean.n_predictions = pred_n;
  if (auc_n > 0) cv.mean.auc = auc_sum / static_cast<double>(auc_n);
  if (r2_n > 0) cv.mean.r2 = r2_sum / static_cast<double>(r2_n);
  return cv;
}

std::map<int, CvResult> k_window_sweep(const Dataset& ds, const ModelConfig& base,
                                       const TrainConfig& tc, const std::vector<int>& k_grid,
                                       int n_folds) {
  std::map<int, CvResult> sweep;
  for (int k : k_grid) {
    ModelConfig config = base;
    config.review_window = k;
    sweep[k] = cross_validate(ds, config, tc, n_folds);
  }
  return sweep;
}

void write_cv_metrics_json(const CvResult& cv, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  auto row = [](int fold, int epoch, const MetricsReport& m) {
    json j = metrics_to_json(m);
    j["fold"] = fold;
    j["epoch"] = epoch;
    return j;
  };
  for (const FoldOutcome& fold : cv.folds) {
    for (const EpochLog& e : fold.epochs) {
      json j = row(fold.fold, e.epoch, e.val);
      j["split"] = "val";
      j["train_loss"] = e.train_loss;
      out << j.dump() << "\n";
    }
    json j = row(fold.fold, fold.best_epoch, fold.test);
    j["split"] = "test";
    out << j.dump() << "\n";
  }
  json mean = row(-1, 0, cv.mean);
  mean["split"] = "mean";
  out << mean.dump() << "\n";
}

namespace {

std::string opt_str(const std::optional<double>& v) { return v ? fmt_double(*v, 6) : "n/a"; }

}  // namespace

void write_k_sensitivity_csv(const std::map<int, CvResult>& sweep, const std::string& path) {
  CsvWriter out(path);
  std::vector<std::string> header = {"Metric"};
  for (const auto& [k, _] : sweep) header.push_back("K=" + std::to_string(k));
  out.write_row(header);

  std::vector<std::string> auc = {"AUC"}, acc = {"ACC"}, rmse = {"RMSE"}, r2 = {"r2"};
  for (const auto& [_, cv] : sweep) {
    auc.push_back(opt_str(cv.mean.auc));
    acc.push_back(fmt_double(cv.mean.acc, 6));
    rmse.push_back(fmt_double(cv.mean.rmse, 6));
    r2.push_back(opt_str(cv.mean.r2));
  }
  out.write_row(auc);
  out.write_row(acc);
  out.write_row(rmse);
  out.write_row(r2);
}

void write_k_sensitivity_json(const std::map<int, CvResult>& sweep, const std::string& path) {
  json arr = json::array();
  for (const auto& [k, cv] : sweep) {
    json j = metrics_to_json(cv.mean);
    j["k"] = k;
    arr.push_back(j);
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << arr.dump(2) << "\n";
}

}  // namespace cpf
