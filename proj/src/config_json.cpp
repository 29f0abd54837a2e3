#include "cpf/config_json.h"

#include <set>

#include "cpf/error.h"

namespace cpf {

using nlohmann::json;

void require_keys(const json& j, std::initializer_list<const char*> allowed,
                  const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!ok.count(key)) throw ConfigError("unknown key \"" + key + "\" in " + where);
  }
}

json model_config_to_json(const ModelConfig& c) {
  return json{{"d", c.d},
              {"d_a", c.d_a},
              {"n_exercises", c.n_exercises},
              {"k_concepts", c.k_concepts},
              {"answer_time_vocab", c.answer_time_vocab},
              {"interval_time_vocab", c.interval_time_vocab},
              {"difficulty_buckets", c.difficulty_buckets},
              {"accuracy_buckets", c.accuracy_buckets},
              {"review_window", c.review_window},
              {"alpha", c.alpha},
              {"beta", c.beta},
              {"mu", c.mu},
              {"delta", c.delta},
              {"lambda", c.lambda},
              {"gamma", c.gamma},
              {"rho", c.rho},
              {"soft_p", c.soft_p},
              {"dropout", c.dropout},
              {"ablation", to_string(c.ablation)},
              {"mode", to_string(c.mode)},
              {"review_mode", to_string(c.review_mode)}};
}

ModelConfig model_config_from_json(const json& j, ModelConfig c) {
  require_keys(j,
               {"d", "d_a", "n_exercises", "k_concepts", "answer_time_vocab",
                "interval_time_vocab", "difficulty_buckets", "accuracy_buckets", "review_window",
                "alpha", "beta", "mu", "delta", "lambda", "gamma", "rho", "soft_p", "dropout",
                "ablation", "mode", "review_mode"},
               "model config");
  if (j.contains("d")) c.d = j["d"].get<int>();
  if (j.contains("d_a")) c.d_a = j["d_a"].get<int>();
  if (j.contains("n_exercises")) c.n_exercises = j["n_exercises"].get<int>();
  if (j.contains("k_concepts")) c.k_concepts = j["k_concepts"].get<int>();
  if (j.contains("answer_time_vocab")) c.answer_time_vocab = j["answer_time_vocab"].get<int>();
  if (j.contains("interval_time_vocab")) {
    c.interval_time_vocab = j["interval_time_vocab"].get<int>();
  }
  if (j.contains("difficulty_buckets")) c.difficulty_buckets = j["difficulty_buckets"].get<int>();
  if (j.contains("accuracy_buckets")) c.accuracy_buckets = j["accuracy_buckets"].get<int>();
  if (j.contains("review_window")) c.review_window = j["review_window"].get<int>();
  if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
  if (j.contains("beta")) c.beta = j["beta"].get<double>();
  if (j.contains("mu")) c.mu = j["mu"].get<double>();
  if (j.contains("delta")) c.delta = j["delta"].get<double>();
  if (j.contains("lambda")) c.lambda = j["lambda"].get<double>();
  if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
  if (j.contains("rho")) c.rho = j["rho"].get<double>();
  if (j.contains("soft_p")) c.soft_p = j["soft_p"].get<bool>();
  if (j.contains("dropout")) c.dropout = j["dropout"].get<double>();
  if (j.contains("ablation")) c.ablation = ablation_from_string(j["ablation"].get<std::string>());
  if (j.contains("mode")) c.mode = mode_from_string(j["mode"].get<std::string>());
  if (j.contains("review_mode")) {
    c.review_mode = review_mode_from_string(j["review_mode"].get<std::string>());
  }
  return c;
}

json train_config_to_json(const TrainConfig& c) {
  return json{{"lr", c.lr},
              {"batch_size", c.batch_size},
              {"epochs", c.epochs},
              {"l2_lambda", c.l2_lambda},
              {"clip_norm", c.clip_norm},
              {"patience", c.patience},
              {"seed", c.seed}};
}

TrainConfig train_config_from_json(const json& j, TrainConfig c) {
  require_keys(j, {"lr", "batch_size", "epochs", "l2_lambda", "clip_norm", "patience", "seed"},
               "train config");
  if (j.contains("lr")) c.lr = j["lr"].get<double>();
  if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<int>();
  if (j.contains("epochs")) c.epochs = j["epochs"].get<int>();
  if (j.contains("l2_lambda")) c.l2_lambda = j["l2_lambda"].get<double>();
  if (j.contains("clip_norm")) c.clip_norm = j["clip_norm"].get<double>();
  if (j.contains("patience")) c.patience = j["patience"].get<int>();
  if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
  return c;
}

json data_config_to_json(const DiscretizerSpec& spec, int window, const ColumnMapping& columns) {
  return json{{"answer_time_cap_s", spec.answer_time_cap_s},
              {"interval_time_cap_min", spec.interval_time_cap_min},
              {"difficulty_buckets", spec.difficulty_buckets},
              {"accuracy_buckets", spec.accuracy_buckets},
              {"window", window},
              {"column_mapping",
               json{{"student", columns.student},
                    {"exercise", columns.exercise},
                    {"concept", columns.skill},
                    {"correct", columns.correct},
                    {"answer_time", columns.answer_time},
                    {"timestamp", columns.timestamp}}}};
}

void data_config_from_json(const json& j, DiscretizerSpec& spec, int& window,
                           ColumnMapping& columns) {
  require_keys(j,
               {"answer_time_cap_s", "interval_time_cap_min", "difficulty_buckets",
                "accuracy_buckets", "window", "column_mapping"},
               "data config");
  if (j.contains("answer_time_cap_s")) spec.answer_time_cap_s = j["answer_time_cap_s"].get<int>();
  if (j.contains("interval_time_cap_min")) {
    spec.interval_time_cap_min = j["interval_time_cap_min"].get<int>();
  }
  if (j.contains("difficulty_buckets")) {
    spec.difficulty_buckets = j["difficulty_buckets"].get<int>();
  }
  if (j.contains("accuracy_buckets")) spec.accuracy_buckets = j["accuracy_buckets"].get<int>();
  if (j.contains("window")) window = j["window"].get<int>();
  if (j.contains("column_mapping")) {
    const json& m = j["column_mapping"];
    require_keys(m, {"student", "exercise", "concept", "correct", "answer_time", "timestamp"},
                 "column_mapping");
    if (m.contains("student")) columns.student = m["student"].get<std::string>();
    if (m.contains("exercise")) columns.exercise = m["exercise"].get<std::string>();
    if (m.contains("concept")) columns.skill = m["concept"].get<std::string>();
    if (m.contains("correct")) columns.correct = m["correct"].get<std::string>();
    if (m.contains("answer_time")) columns.answer_time = m["answer_time"].get<std::string>();
    if (m.contains("timestamp")) columns.timestamp = m["timestamp"].get<std::string>();
  }
}

json metrics_to_json(const MetricsReport& m) {
  json j{{"acc", m.acc}, {"rmse", m.rmse}, {"n_predictions", m.n_predictions}};
  j["auc"] = m.auc ? json(*m.auc) : json(nullptr);
  j["r2"] = m.r2 ? json(*m.r2) : json(nullptr);
  return j;
}

}  // namespace cpf
