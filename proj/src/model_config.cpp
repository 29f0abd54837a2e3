#include "cpf/model_config.h"

#include "cpf/error.h"

namespace cpf {

void ModelConfig::validate() const {
  if (d <= 0 || d_a <= 0) throw ConfigError("embedding widths must be positive");
  if (n_exercises <= 0 || k_concepts <= 0) {
    throw ConfigError("model needs positive exercise and concept counts");
  }
  if (review_window < 0) throw ConfigError("review window must be >= 0");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must lie in [0, 1)");
  if (delta <= 0.0) throw ConfigError("forgetting amplitude delta must be positive");
  if (gamma < 0.0 || rho < 0.0) throw ConfigError("gamma and rho must be non-negative");
}

std::string to_string(Ablation a) {
  switch (a) {
    case Ablation::kFull: return "full";
    case Ablation::kNoPMatrix: return "P";
    case Ablation::kNoPersonalization: return "I";
    case Ablation::kNoLearningModule: return "L";
    case Ablation::kNoForgetting: return "FP";
  }
  return "full";
}

std::string to_string(ModelMode m) { return m == ModelMode::kLpkt ? "lpkt" : "cpf"; }

std::string to_string(ReviewMode r) {
  return r == ReviewMode::kLiteral ? "literal" : "attention_over_past";
}

Ablation ablation_from_string(const std::string& s) {
  if (s == "full") return Ablation::kFull;
  if (s == "P") return Ablation::kNoPMatrix;
  if (s == "I") return Ablation::kNoPersonalization;
  if (s == "L") return Ablation::kNoLearningModule;
  if (s == "FP") return Ablation::kNoForgetting;
  throw ConfigError("unknown ablation: " + s + " (expected full, P, I, L or FP)");
}

ModelMode mode_from_string(const std::string& s) {
  if (s == "cpf") return ModelMode::kCpf;
  if (s == "lpkt") return ModelMode::kLpkt;
  throw ConfigError("unknown mode: " + s + " (expected cpf or lpkt)");
}

ReviewMode review_mode_from_string(const std::string& s) {
  if (s == "attention_over_past") return ReviewMode::kAttentionOverPast;
  if (s == "literal") return ReviewMode::kLiteral;
  throw ConfigError("unknown review mode: " + s);
}

}  // namespace cpf
