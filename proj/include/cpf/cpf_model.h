#ifndef CPF_CPF_MODEL_H
#define CPF_CPF_MODEL_H

#include <optional>
#include <vector>

#include "cpf/concept_graph.h"
#include "cpf/dataset.h"
#include "cpf/model_config.h"
#include "cpf/parameter.h"
#include "cpf/tape.h"

namespace cpf {

/// Per-step diagnostics exported for downstream analysis.
struct StepTrace {
  int step = 0;
  int exercise = 0;
  int skill = 0;
  int correct = 0;
  std::optional<real_t> prediction;  // absent on each window's first valid step
  real_t pooled_norm = 0.0;          // |q_e . h_{t-1}|
  real_t w_f = 1.0;                  // causal forgetting weight
  real_t gain_gate_mean = 0.0;       // mean of the learning gate
  real_t forget_gate_mean = 1.0;     // mean of the forgetting gate (1 when disabled)
};

/// Knowledge-tracing cell with personalized learning gains and causal
/// forgetting, plus the simpler baseline cell selected by ModelMode::kLpkt.
///
/// The cell keeps a K x d knowledge state. One step pools the state through
/// the exercise's enhanced Q row, forms a personalized learning embedding
/// from exercise, answer and student-ability features, gates the learning
/// gain, damps the forgetting-gate input by the time distance to the
/// nearest prerequisite exercise, attends over recently pooled states, and
/// finally writes the gated update back. Eval-mode forwards are pure; a
/// built model is safe for concurrent readers.
class CpfModel {
public:
  CpfModel(ModelConfig config, std::vector<int> exercise_skill, PMatrix p, uint64_t init_seed);

  struct ForwardOptions {
    bool training = false;  // enables dropout, which draws from dropout_rng
    Rng* dropout_rng = nullptr;
    bool want_traces = false;
  };

  struct ForwardResult {
    std::vector<Value> predictions;  // taped scalars, one per predicted step
    std::vector<real_t> labels;
    std::vector<int> target_step;    // window position each prediction refers to
    std::vector<StepTrace> traces;
  };

  /// Run the recurrent cell over one window. Valid steps form a prefix;
  /// step t >= 1 receives a prediction made from the state after step t-1.
  ForwardResult forward(Tape& tape, const StudentSequence& seq,
                        const ForwardOptions& opts) const;
  ForwardResult forward(Tape& tape, const StudentSequence& seq) const {
    return forward(tape, seq, ForwardOptions{});
  }

  // --- cell pieces, exposed for direct testing ---

  /// Ability mix alpha*df + beta*ac + mu*at; a zero vector under the
  /// no-personalization ablation.
  Value student_ability(Tape& tape, int difficulty_bucket, int accuracy_bucket,
                        int answer_bucket) const;

  /// Personalized learning embedding from (exercise (+) concept, answer,
  /// ability). The no-learning-module ablation zeroes the ability slot.
  Value learning_embedding(Tape& tape, int exercise, int answer, Value ability) const;

  /// Mean concept embedding of the prerequisites of a concept; zero vector
  /// when there are none or under the no-P ablation. With soft_p enabled,
  /// non-edges contribute with weight rho instead of 0.
  Value prerequisite_vector(Tape& tape, int skill) const;

  /// Scalar review bonus |sigmoid(p_vec (+) pooled)|_2 / sqrt(2d).
  Value review_bonus(Tape& tape, Value p_vec, Value pooled) const;

  struct LearningGain {
    Value gain;        // gate * (tanh-gain + 1)/2 + review bonus, length d
    Value gain_outer;  // enhanced-Q outer product, K x d
    Value gate;        // learning gate, length d
  };

  /// Gated learning gain for one step. gain_in is the (possibly dropped
  /// out) concatenation of the learning embedding and the pooled state.
  LearningGain learning_gain(Tape& tape, Value gain_in, Value p_vec, Value pooled,
                             const Tensor& q) const;

  /// Attention over the most recent pooled states (cosine similarity to the
  /// latest one, softmax combine). Empty history or review_window 0 gives a
  /// zero vector; literal mode returns the latest pooled state exactly.
  Value review_attention(Tape& tape, const std::vector<Value>& pooled_history) const;

  /// Per-concept forgetting gate sigmoid(W4 [h_row (+) tail] + b4) with
  /// tail = causal gain (+) interval (+) ability (+) review state.
  Value forgetting_gate(Tape& tape, Value h_prev, Value causal_gain, Value interval_emb,
                        Value ability, Value review_state) const;

  /// h_t = gain_outer + gate (*) h_prev.
  Value update_state(Tape& tape, Value h_prev, Value gain_outer, Value gate) const;

  /// Prediction for the next exercise from the updated state.
  Value predict_next(Tape& tape, Value h_t, int next_exercise) const;

  /// Baseline cell step (used in kLpkt mode); returns the updated state.
  Value lpkt_step(Tape& tape, Value l_prev, Value l_t, Value interval_emb, Value h_prev,
                  int exercise) const;

  /// Enhanced Q row for an exercise: gamma everywhere, 1 at its concept.
  Tensor q_row(int exercise) const;

  const ModelConfig& config() const { return config_; }
  const PMatrix& p_matrix() const { return p_; }
  void set_p_matrix(PMatrix p);
  const std::vector<int>& exercise_skill() const { return exercise_skill_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }
  std::vector<Parameter*> trainable() { return params_.all(); }

  /// Deep copy of all parameter tensors (for best-epoch snapshots).
  std::vector<Tensor> snapshot_values() const;
  void restore_values(const std::vector<Tensor>& snapshot);

private:
  Value zero_vec(Tape& tape, int n) const;
  Value maybe_dropout(Tape& tape, Value v, const ForwardOptions& opts) const;
  ForwardResult forward_cpf(Tape& tape, const StudentSequence& seq,
                            const ForwardOptions& opts) const;
  ForwardResult forward_lpkt(Tape& tape, const StudentSequence& seq,
                             const ForwardOptions& opts) const;

  ModelConfig config_;
  std::vector<int> exercise_skill_;
  PMatrix p_;
  ParameterSet params_;
  ForgettingParams forgetting_;

  // cached handles into params_
  Parameter* emb_exercise_ = nullptr;
  Parameter* emb_skill_ = nullptr;
  Parameter* emb_answer_ = nullptr;
  Parameter* emb_answer_time_ = nullptr;
  Parameter* emb_interval_ = nullptr;
  Parameter* emb_difficulty_ = nullptr;
  Parameter* emb_accuracy_ = nullptr;
  Parameter *w1_ = nullptr, *b1_ = nullptr;
  Parameter *w2_ = nullptr, *b2_ = nullptr;
  Parameter *w3_ = nullptr, *b3_ = nullptr;
  Parameter *w4_ = nullptr, *b4_ = nullptr;
  Parameter *w5_ = nullptr, *b5_ = nullptr;
};

}  // namespace cpf

#endif
