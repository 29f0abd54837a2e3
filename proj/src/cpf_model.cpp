#include "cpf/cpf_model.h"

#include <cmath>

#include "cpf/error.h"

namespace cpf {

namespace {

constexpr const char* kEmbExercise = "emb_exercise";
constexpr const char* kEmbSkill = "emb_concept";
constexpr const char* kEmbAnswer = "emb_answer";
constexpr const char* kEmbAnswerTime = "emb_answer_time";
constexpr const char* kEmbInterval = "emb_interval_time";
constexpr const char* kEmbDifficulty = "emb_difficulty";
constexpr const char* kEmbAccuracy = "emb_accuracy";

}  // namespace

CpfModel::CpfModel(ModelConfig config, std::vector<int> exercise_skill, PMatrix p,
                   uint64_t init_seed)
    : config_(std::move(config)), exercise_skill_(std::move(exercise_skill)), p_(std::move(p)) {
  config_.validate();
  if (static_cast<int>(exercise_skill_.size()) != config_.n_exercises) {
    throw ConfigError("exercise-concept map size does not match n_exercises");
  }
  for (int c : exercise_skill_) {
    if (c < 0 || c >= config_.k_concepts) throw ConfigError("exercise maps to unknown concept");
  }
  if (p_.k != config_.k_concepts) {
    throw ConfigError("P matrix size " + std::to_string(p_.k) + " does not match concepts " +
                      std::to_string(config_.k_concepts));
  }
  forgetting_ = ForgettingParams{config_.delta, config_.lambda};

  const int d = config_.d;
  const int d_a = config_.d_a;
  emb_exercise_ = &params_.add(kEmbExercise, {config_.n_exercises, d});
  emb_skill_ = &params_.add(kEmbSkill, {config_.k_concepts, d});
  emb_answer_ = &params_.add(kEmbAnswer, {2, d_a});
  emb_answer_time_ = &params_.add(kEmbAnswerTime, {config_.answer_time_vocab, d});
  emb_interval_ = &params_.add(kEmbInterval, {config_.interval_time_vocab, d});
  if (config_.mode == ModelMode::kCpf) {
    emb_difficulty_ = &params_.add(kEmbDifficulty, {config_.difficulty_buckets, d});
    emb_accuracy_ = &params_.add(kEmbAccuracy, {config_.accuracy_buckets, d});
    w1_ = &params_.add("W1", {2 * d + d_a + d, d});
    b1_ = &params_.add("b1", {d});
    w2_ = &params_.add("W2", {2 * d, d});
    b2_ = &params_.add("b2", {d});
    w3_ = &params_.add("W3", {2 * d, d});
    b3_ = &params_.add("b3", {d});
    w4_ = &params_.add("W4", {5 * d, d});
    b4_ = &params_.add("b4", {d});
  } else {
    w1_ = &params_.add("W1", {d + d_a + d, d});
    b1_ = &params_.add("b1", {d});
    w2_ = &params_.add("W2", {4 * d, d});
    b2_ = &params_.add("b2", {d});
    w3_ = &params_.add("W3", {4 * d, d});
    b3_ = &params_.add("b3", {d});
    w4_ = &params_.add("W4", {3 * d, d});
    b4_ = &params_.add("b4", {d});
  }
  w5_ = &params_.add("W5", {2 * d + d, 1});
  b5_ = &params_.add("b5", {1});

  Rng rng(init_seed);
  for (Parameter* param : params_.all()) {
    if (param->name[0] == 'b') continue;  // biases start at zero
    init_uniform_glorot(*param, rng);
  }
}

void CpfModel::set_p_matrix(PMatrix p) {
  if (p.k != config_.k_concepts) {
    throw ConfigError("P matrix size does not match model concepts");
  }
  p_ = std::move(p);
}

Tensor CpfModel::q_row(int exercise) const {
  Tensor row = Tensor::full({config_.k_concepts}, config_.gamma);
  row[exercise_skill_[static_cast<size_t>(exercise)]] = 1.0;
  return row;
}

Value CpfModel::zero_vec(Tape& tape, int n) const { return tape.constant(Tensor({n})); }

Value CpfModel::maybe_dropout(Tape& tape, Value v, const ForwardOptions& opts) const {
  if (!opts.training || config_.dropout <= 0.0) return v;
  if (!opts.dropout_rng) throw ConfigError("training forward needs a dropout rng");
  const real_t keep = 1.0 - config_.dropout;
  Tensor mask(tape.val(v).shape());
  for (int i = 0; i < mask.size(); ++i) {
    mask[i] = opts.dropout_rng->bernoulli(keep) ? 1.0 / keep : 0.0;
  }
  return tape.apply_mask(v, std::move(mask));
}

Value CpfModel::student_ability(Tape& tape, int difficulty_bucket, int accuracy_bucket,
                                int answer_bucket) const {
  if (config_.mode == ModelMode::kLpkt) {
    throw ConfigError("student ability is not part of the baseline cell");
  }
  if (config_.ablation == Ablation::kNoPersonalization) return zero_vec(tape, config_.d);
  Value df = tape.embed(*emb_difficulty_, difficulty_bucket);
  Value ac = tape.embed(*emb_accuracy_, accuracy_bucket);
  Value at = tape.embed(*emb_answer_time_, answer_bucket);
  Value mix = tape.scale(df, config_.alpha);
  mix = tape.add(mix, tape.scale(ac, config_.beta));
  return tape.add(mix, tape.scale(at, config_.mu));
}

Value CpfModel::learning_embedding(Tape& tape, int exercise, int answer, Value ability) const {
  Value e = tape.embed(*emb_exercise_, exercise);
  Value c = tape.embed(*emb_skill_, exercise_skill_[static_cast<size_t>(exercise)]);
  Value a = tape.embed(*emb_answer_, answer);
  Value s = config_.ablation == Ablation::kNoLearningModule ? zero_vec(tape, config_.d) : ability;
  return tape.linear(tape.concat({e, c, a, s}), *w1_, *b1_);
}

Value CpfModel::prerequisite_vector(Tape& tape, int skill) const {
  if (config_.ablation == Ablation::kNoPMatrix) return zero_vec(tape, config_.d);
  if (config_.soft_p) {
    std::vector<real_t> weights(static_cast<size_t>(config_.k_concepts), config_.rho);
    for (int pre : p_.prereqs_of[static_cast<size_t>(skill)]) {
      weights[static_cast<size_t>(pre)] = 1.0;
    }
    return tape.embed_weighted_mean(*emb_skill_, weights);
  }
  return tape.embed_mean(*emb_skill_, p_.prereqs_of[static_cast<size_t>(skill)]);
}

Value CpfModel::review_bonus(Tape& tape, Value p_vec, Value pooled) const {
  if (config_.ablation == Ablation::kNoLearningModule) return tape.constant(Tensor::scalar(0.0));
  Value gated = tape.sigmoid(tape.concat({p_vec, pooled}));
  Value norm = tape.l2_norm(gated);
  return tape.scale(norm, 1.0 / std::sqrt(2.0 * config_.d));
}

CpfModel::LearningGain CpfModel::learning_gain(Tape& tape, Value gain_in, Value p_vec,
                                               Value pooled, const Tensor& q) const {
  LearningGain out;
  Value lg = tape.tanh_act(tape.linear(gain_in, *w2_, *b2_));
  out.gate = tape.sigmoid(tape.linear(gain_in, *w3_, *b3_));
  Value bonus = review_bonus(tape, p_vec, pooled);
  Value half = tape.scale(tape.add_scalar(lg, tape.constant(Tensor::scalar(1.0))), 0.5);
  out.gain = tape.add_scalar(tape.mul(out.gate, half), bonus);
  out.gain_outer = tape.outer_rows(q, out.gain);
  return out;
}

Value CpfModel::review_attention(Tape& tape, const std::vector<Value>& pooled_history) const {
  if (config_.review_window == 0 || pooled_history.empty()) return zero_vec(tape, config_.d);
  Value query = pooled_history.back();
  if (config_.review_mode == ReviewMode::kLiteral) {
    // softmax weights sum to one, so the literal combination collapses to
    // the latest pooled state
    return query;
  }
  const size_t take =
      std::min(pooled_history.size(), static_cast<size_t>(config_.review_window));
  std::vector<Value> candidates(pooled_history.end() - static_cast<long>(take),
                                pooled_history.end());
  const real_t query_norm = tape.val(query).norm();
  std::vector<Value> sims;
  sims.reserve(take);
  for (const Value& cand : candidates) {
    const real_t cand_norm = tape.val(cand).norm();
    if (query_norm <= 0.0 || cand_norm <= 0.0) {
      sims.push_back(tape.constant(Tensor::scalar(0.0)));
      continue;
    }
    Value denom = tape.mul(tape.l2_norm(cand), tape.l2_norm(query));
    sims.push_back(tape.div(tape.dot(cand, query), denom));
  }
  Value weights = tape.softmax(tape.concat(sims));
  return tape.weighted_sum(candidates, weights);
}

Value CpfModel::forgetting_gate(Tape& tape, Value h_prev, Value causal_gain, Value interval_emb,
                                Value ability, Value review_state) const {
  Value tail = tape.concat({causal_gain, interval_emb, ability, review_state});
  return tape.row_gate_sigmoid(h_prev, tail, *w4_, *b4_);
}

Value CpfModel::update_state(Tape& tape, Value h_prev, Value gain_outer, Value gate) const {
  return tape.add(gain_outer, tape.mul(gate, h_prev));
}

Value CpfModel::predict_next(Tape& tape, Value h_t, int next_exercise) const {
  Value e = tape.embed(*emb_exercise_, next_exercise);
  Value c = tape.embed(*emb_skill_, exercise_skill_[static_cast<size_t>(next_exercise)]);
  Value pooled = tape.pool_rows(q_row(next_exercise), h_t);
  return tape.sigmoid(tape.linear(tape.concat({e, c, pooled}), *w5_, *b5_));
}

Value CpfModel::lpkt_step(Tape& tape, Value l_prev, Value l_t, Value interval_emb, Value h_prev,
                          int exercise) const {
  const Tensor q = q_row(exercise);
  Value pooled = tape.pool_rows(q, h_prev);
  Value gate_in = tape.concat({l_prev, interval_emb, l_t, pooled});
  Value lg = tape.tanh_act(tape.linear(gate_in, *w2_, *b2_));
  Value gate_l = tape.sigmoid(tape.linear(gate_in, *w3_, *b3_));
  Value half = tape.scale(tape.add_scalar(lg, tape.constant(Tensor::scalar(1.0))), 0.5);
  Value gain = tape.mul(gate_l, half);
  Value gain_outer = tape.outer_rows(q, gain);
  Value tail = tape.concat({gain, interval_emb});
  Value gate_f = tape.row_gate_sigmoid(h_prev, tail, *w4_, *b4_);
  return update_state(tape, h_prev, gain_outer, gate_f);
}

CpfModel::ForwardResult CpfModel::forward(Tape& tape, const StudentSequence& seq,
                                          const ForwardOptions& opts) const {
  // valid steps must form a prefix; padded steps are never consumed
  bool seen_padding = false;
  for (uint8_t m : seq.mask) {
    if (!m) {
      seen_padding = true;
    } else if (seen_padding) {
      throw DataError("window mask must be a prefix of valid steps");
    }
  }
  return config_.mode == ModelMode::kLpkt ? forward_lpkt(tape, seq, opts)
                                          : forward_cpf(tape, seq, opts);
}

CpfModel::ForwardResult CpfModel::forward_cpf(Tape& tape, const StudentSequence& seq,
                                              const ForwardOptions& opts) const {
  ForwardResult result;
  const int valid = seq.valid_count();
  if (valid == 0) return result;
  const std::span<const Step> steps(seq.steps.data(), static_cast<size_t>(valid));
  const bool no_forgetting = config_.ablation == Ablation::kNoForgetting;
  const bool no_p = config_.ablation == Ablation::kNoPMatrix || no_forgetting;

  Value h = tape.constant(Tensor({config_.k_concepts, config_.d}));
  std::vector<Value> pooled_history;
  pooled_history.reserve(static_cast<size_t>(valid));

  for (int t = 0; t < valid; ++t) {
    const Step& st = steps[static_cast<size_t>(t)];
    const Tensor q = q_row(st.exercise);

    Value ability = student_ability(tape, st.difficulty_bucket, st.accuracy_bucket,
                                    st.answer_bucket);
    Value l_t = maybe_dropout(
        tape, learning_embedding(tape, st.exercise, st.correct, ability), opts);
    Value pooled = tape.pool_rows(q, h);

    Value gain_in = maybe_dropout(tape, tape.concat({l_t, pooled}), opts);
    Value p_vec = prerequisite_vector(tape, st.skill);
    const LearningGain lg = learning_gain(tape, gain_in, p_vec, pooled, q);

    real_t w_f = 1.0;
    if (!no_p) {
      w_f = forgetting_weight(steps, t, nearest_prerequisite_step(steps, t, p_), forgetting_);
    }

    Value h_next;
    real_t forget_gate_mean = 1.0;
    if (no_forgetting) {
      h_next = tape.add(lg.gain_outer, h);
    } else {
      Value interval_emb = tape.embed(*emb_interval_, st.interval_bucket);
      Value causal_gain = tape.scale(lg.gain, w_f);
      Value review_state = review_attention(tape, pooled_history);
      Value tail = maybe_dropout(
          tape, tape.concat({causal_gain, interval_emb, ability, review_state}), opts);
      Value gate_f = tape.row_gate_sigmoid(h, tail, *w4_, *b4_);
      h_next = update_state(tape, h, lg.gain_outer, gate_f);
      const Tensor& gv = tape.val(gate_f);
      real_t sum = 0.0;
      for (int i = 0; i < gv.size(); ++i) sum += gv[i];
      forget_gate_mean = sum / gv.size();
    }
    if (!tape.val(h_next).all_finite()) {
      throw NumericError("non-finite knowledge state at step " + std::to_string(t));
    }
    h = h_next;
    pooled_history.push_back(pooled);

    if (opts.want_traces) {
      StepTrace trace;
      trace.step = t;
      trace.exercise = st.exercise;
      trace.skill = st.skill;
      trace.correct = st.correct;
      trace.pooled_norm = tape.val(pooled).norm();
      trace.w_f = w_f;
      const Tensor& glv = tape.val(lg.gate);
      real_t gsum = 0.0;
      for (int i = 0; i < glv.size(); ++i) gsum += glv[i];
      trace.gain_gate_mean = gsum / glv.size();
      trace.forget_gate_mean = forget_gate_mean;
      result.traces.push_back(trace);
    }

    if (t + 1 < valid) {
      const Step& next = steps[static_cast<size_t>(t + 1)];
      Value y = predict_next(tape, h, next.exercise);
      result.predictions.push_back(y);
      result.labels.push_back(static_cast<real_t>(next.correct));
      result.target_step.push_back(t + 1);
    }
  }
  if (opts.want_traces) {
    for (size_t i = 0; i < result.predictions.size(); ++i) {
      result.traces[static_cast<size_t>(result.target_step[i])].prediction =
          tape.val(result.predictions[i]).scalar_value();
    }
  }
  return result;
}

CpfModel::ForwardResult CpfModel::forward_lpkt(Tape& tape, const StudentSequence& seq,
                                               const ForwardOptions& opts) const {
  ForwardResult result;
  const int valid = seq.valid_count();
  if (valid == 0) return result;
  const std::span<const Step> steps(seq.steps.data(), static_cast<size_t>(valid));

  Value h = tape.constant(Tensor({config_.k_concepts, config_.d}));
  Value l_prev = zero_vec(tape, config_.d);

  for (int t = 0; t < valid; ++t) {
    const Step& st = steps[static_cast<size_t>(t)];
    Value e = tape.embed(*emb_exercise_, st.exercise);
    Value a = tape.embed(*emb_answer_, st.correct);
    Value at = tape.embed(*emb_answer_time_, st.answer_bucket);
    Value l_t = maybe_dropout(tape, tape.linear(tape.concat({e, a, at}), *w1_, *b1_), opts);
    Value interval_emb = tape.embed(*emb_interval_, st.interval_bucket);
    Value h_next = lpkt_step(tape, l_prev, l_t, interval_emb, h, st.exercise);
    if (!tape.val(h_next).all_finite()) {
      throw NumericError("non-finite knowledge state at step " + std::to_string(t));
    }
    if (opts.want_traces) {
      StepTrace trace;
      trace.step = t;
      trace.exercise = st.exercise;
      trace.skill = st.skill;
      trace.correct = st.correct;
      trace.pooled_norm = tape.val(tape.pool_rows(q_row(st.exercise), h)).norm();
      result.traces.push_back(trace);
    }
    h = h_next;
    l_prev = l_t;
    if (t + 1 < valid) {
      const Step& next = steps[static_cast<size_t>(t + 1)];
      result.predictions.push_back(predict_next(tape, h, next.exercise));
      result.labels.push_back(static_cast<real_t>(next.correct));
      result.target_step.push_back(t + 1);
    }
  }
  if (opts.want_traces) {
    for (size_t i = 0; i < result.predictions.size(); ++i) {
      result.traces[static_cast<size_t>(result.target_step[i])].prediction =
          tape.val(result.predictions[i]).scalar_value();
    }
  }
  return result;
}

std::vector<Tensor> CpfModel::snapshot_values() const {
  std::vector<Tensor> snap;
  for (const Parameter* p : params_.all()) snap.push_back(p->value);
  return snap;
}

void CpfModel::restore_values(const std::vector<Tensor>& snapshot) {
  auto all = params_.all();
  if (snapshot.size() != all.size()) throw ConfigError("snapshot size mismatch");
  for (size_t i = 0; i < all.size(); ++i) all[i]->value = snapshot[i];
}

}  // namespace cpf
