#ifndef CPF_MODEL_CONFIG_H
#define CPF_MODEL_CONFIG_H

#include <string>

namespace cpf {

/// Model variants with one component removed.
///   kNoPMatrix         - no concept-level forgetting: w_f = 1, prerequisite
///                        vector forced to zero; the time gate remains.
///   kNoPersonalization - student ability replaced by a zero vector
///                        everywhere it feeds the cell.
///   kNoLearningModule  - learning embedding built without the ability term
///                        and the review bonus dropped.
///   kNoForgetting      - forgetting gate forced to all-ones and w_f = 1.
enum class Ablation { kFull, kNoPMatrix, kNoPersonalization, kNoLearningModule, kNoForgetting };

enum class ModelMode { kCpf, kLpkt };

/// How the review attention combines pooled states: attend over the recent
/// pooled history (default), or the literal form that algebraically reduces
/// to the latest pooled state.
enum class ReviewMode { kAttentionOverPast, kLiteral };

struct ModelConfig {
  int d = 128;    // exercise/concept/state embedding width
  int d_a = 50;   // answer embedding width
  int n_exercises = 0;
  int k_concepts = 0;
  int answer_time_vocab = 3601;
  int interval_time_vocab = 43201;
  int difficulty_buckets = 100;
  int accuracy_buckets = 100;
  int review_window = 50;

  // ability mix weights
  double alpha = 1.0 / 3.0;
  double beta = 1.0 / 3.0;
  double mu = 1.0 / 3.0;

  // causal forgetting weight
  double delta = 2.0;
  double lambda = 0.0;

  double gamma = 0.03;  // enhanced Q off-concept value
  double rho = 0.03;    // soft prerequisite strength (used only with soft_p)
  bool soft_p = false;

  double dropout = 0.2;
  Ablation ablation = Ablation::kFull;
  ModelMode mode = ModelMode::kCpf;
  ReviewMode review_mode = ReviewMode::kAttentionOverPast;

  void validate() const;
};

std::string to_string(Ablation a);
std::string to_string(ModelMode m);
std::string to_string(ReviewMode r);
Ablation ablation_from_string(const std::string& s);
ModelMode mode_from_string(const std::string& s);
ReviewMode review_mode_from_string(const std::string& s);

}  // namespace cpf

#endif
