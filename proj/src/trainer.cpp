#include "cpf/trainer.h"

#include <cstdio>
#include <numeric>

#include "cpf/adam.h"
#include "cpf/error.h"
#include "cpf/loss.h"

namespace cpf {

TrainResult train(CpfModel& model, std::span<const StudentSequence> train_windows,
                  std::span<const StudentSequence> val_windows, const TrainConfig& config) {
  if (config.lr < 0.0 || config.batch_size < 1) {
    throw ConfigError("train: lr must be >= 0 and batch_size >= 1");
  }
  TrainResult result;
  std::vector<Parameter*> params = model.trainable();
  // the L2 term of the objective is realized as decoupled decay; its exact
  // derivative is 2 * lambda * theta
  AdamOptimizer opt(AdamConfig{.lr = config.lr, .weight_decay = 2.0 * config.l2_lambda});
  Rng shuffle_rng(config.seed);
  Rng dropout_rng = shuffle_rng.derive(0xD120);

  std::vector<size_t> order(train_windows.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<Tensor> best_snapshot;
  double best_score = -1.0;
  int since_best = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_data_sum = 0.0;
    long epoch_terms = 0;

    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch_size)) {
      const size_t stop = std::min(order.size(), start + static_cast<size_t>(config.batch_size));
      long batch_terms = 0;
      for (size_t i = start; i < stop; ++i) {
        batch_terms += std::max(0, train_windows[order[i]].valid_count() - 1);
      }
      if (batch_terms == 0) continue;

      model.params().zero_grads();
      double batch_data_sum = 0.0;
      for (size_t i = start; i < stop; ++i) {
        const StudentSequence& window = train_windows[order[i]];
        if (window.valid_count() < 2) continue;
        Tape tape;
        CpfModel::ForwardOptions fwd;
        fwd.training = true;
        fwd.dropout_rng = &dropout_rng;
        auto out = model.forward(tape, window, fwd);
        Value loss = tape.scale(tape.bce_sum(out.predictions, out.labels),
                                1.0 / static_cast<double>(batch_terms));
        if (!std::isfinite(tape.val(loss).scalar_value())) {
          throw NumericError("non-finite loss in batch starting at window " +
                             std::to_string(start));
        }
        tape.backward(loss);
        batch_data_sum += tape.val(loss).scalar_value() * static_cast<double>(batch_terms);
      }
      clip_global_norm(params, config.clip_norm);
      opt.step(params);
      epoch_data_sum += batch_data_sum;
      epoch_terms += batch_terms;
    }

    EpochLog log;
    log.epoch = epoch;
    const std::vector<const Parameter*> cparams(params.begin(), params.end());
    log.train_loss = (epoch_terms > 0 ? epoch_data_sum / static_cast<double>(epoch_terms) : 0.0) +
                     l2_sum_squares(cparams, config.l2_lambda);
    log.val = evaluate(model, val_windows);
    result.log.push_back(log);

    const double score = log.val.auc.value_or(log.val.acc);
    if (result.best_epoch < 0 || score > best_score) {
      best_score = score;
      result.best_epoch = epoch;
      result.best_val = log.val;
      best_snapshot = model.snapshot_values();
      since_best = 0;
    } else {
      ++since_best;
    }
    if (config.verbose) {
      std::fprintf(stderr, "epoch %3d  train_loss %.5f  val_auc %s\n", epoch, log.train_loss,
                   log.val.auc ? std::to_string(*log.val.auc).c_str() : "n/a");
    }
    if (config.patience > 0 && since_best >= config.patience) break;
  }

  if (!best_snapshot.empty()) model.restore_values(best_snapshot);
  result.adam_steps = opt.step_count();
  return result;
}

void predict_all(const CpfModel& model, std::span<const StudentSequence> windows,
                 std::vector<double>& predictions, std::vector<int>& labels) {
  predictions.clear();
  labels.clear();
  for (const StudentSequence& window : windows) {
    if (window.valid_count() < 2) continue;
    Tape tape;
    auto out = model.forward(tape, window);
    for (size_t i = 0; i < out.predictions.size(); ++i) {
      predictions.push_back(tape.val(out.predictions[i]).scalar_value());
      labels.push_back(static_cast<int>(out.labels[i]));
    }
  }
}

MetricsReport evaluate(const CpfModel& model, std::span<const StudentSequence> windows) {
  std::vector<double> predictions;
  std::vector<int> labels;
  predict_all(model, windows, predictions, labels);
  return compute_metrics(predictions, labels);
}

}  // namespace cpf
