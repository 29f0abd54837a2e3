#include "cpf/synthetic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "cpf/csv.h"
#include "cpf/error.h"
#include "cpf/metrics.h"

namespace cpf {

using nlohmann::json;

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::string padded_id(char prefix, int idx) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%c%06d", prefix, idx);
  return buf;
}

}  // namespace

World generate_world(const WorldSpec& spec) {
  const long capacity = static_cast<long>(spec.concepts) * (spec.concepts - 1) / 2;
  if (!spec.chain && spec.dag_edges > capacity) {
    throw std::invalid_argument("requested " + std::to_string(spec.dag_edges) +
                                " edges but acyclic capacity is " + std::to_string(capacity));
  }
  World world;
  world.spec = spec;
  Rng rng(spec.seed);

  if (spec.chain) {
    for (int c = 0; c + 1 < spec.concepts; ++c) world.edges.emplace_back(c, c + 1);
  } else {
    // random topological order, then a random subset of forward pairs
    std::vector<int> order(static_cast<size_t>(spec.concepts));
    for (int i = 0; i < spec.concepts; ++i) order[static_cast<size_t>(i)] = i;
    rng.shuffle(order);
    std::vector<std::pair<int, int>> candidates;
    for (int a = 0; a < spec.concepts; ++a) {
      for (int b = a + 1; b < spec.concepts; ++b) {
        candidates.emplace_back(order[static_cast<size_t>(a)], order[static_cast<size_t>(b)]);
      }
    }
    rng.shuffle(candidates);
    candidates.resize(static_cast<size_t>(spec.dag_edges));
    std::sort(candidates.begin(), candidates.end());
    world.edges = std::move(candidates);
  }

  world.exercise_concept.resize(static_cast<size_t>(spec.exercises));
  world.exercise_difficulty.resize(static_cast<size_t>(spec.exercises));
  world.concept_exercises.assign(static_cast<size_t>(spec.concepts), {});
  for (int e = 0; e < spec.exercises; ++e) {
    const int c = e % spec.concepts;  // every concept gets at least one exercise
    world.exercise_concept[static_cast<size_t>(e)] = c;
    world.exercise_difficulty[static_cast<size_t>(e)] =
        rng.uniform(spec.difficulty_min, spec.difficulty_max);
    world.concept_exercises[static_cast<size_t>(c)].push_back(e);
  }
  if (spec.exercises < spec.concepts) {
    throw std::invalid_argument("need at least one exercise per concept");
  }

  world.ability.resize(static_cast<size_t>(spec.students));
  for (int s = 0; s < spec.students; ++s) {
    world.ability[static_cast<size_t>(s)] = rng.uniform(spec.ability_min, spec.ability_max);
  }

  world.successors_of.assign(static_cast<size_t>(spec.concepts), {});
  world.prereqs_of.assign(static_cast<size_t>(spec.concepts), {});
  for (const auto& [i, j] : world.edges) {
    world.successors_of[static_cast<size_t>(i)].push_back(j);
    world.prereqs_of[static_cast<size_t>(j)].push_back(i);
  }
  return world;
}

StudentSim::StudentSim(const World& world, int student)
    : world_(&world),
      ability_(world.ability[static_cast<size_t>(student)]),
      mastery_(static_cast<size_t>(world.spec.concepts), 0.0) {}

void StudentSim::elapse_days(double dt_days) {
  if (dt_days <= 0.0) return;
  const double keep = std::exp(-world_->spec.base_forget_rate * dt_days);
  std::vector<double> loss(mastery_.size());
  for (size_t c = 0; c < mastery_.size(); ++c) {
    loss[c] = mastery_[c] * (1.0 - keep);
    mastery_[c] -= loss[c];
  }
  const double coupling = world_->spec.prerequisite_forget_coupling;
  if (coupling > 0.0) {
    for (const auto& [i, j] : world_->edges) {
      mastery_[static_cast<size_t>(j)] -= coupling * loss[static_cast<size_t>(i)];
    }
    for (double& m : mastery_) m = std::clamp(m, 0.0, 1.0);
  }
}

double StudentSim::correct_probability(int exercise) const {
  const int c = world_->exercise_concept[static_cast<size_t>(exercise)];
  const double d = world_->exercise_difficulty[static_cast<size_t>(exercise)];
  return sigmoid(world_->spec.correctness_scale * (mastery_[static_cast<size_t>(c)] - d));
}

int StudentSim::attempt(int exercise, Rng& rng) {
  const int correct = rng.bernoulli(correct_probability(exercise)) ? 1 : 0;
  const int c = world_->exercise_concept[static_cast<size_t>(exercise)];
  double& m = mastery_[static_cast<size_t>(c)];
  m += ability_ * world_->spec.learn_rate * (1.0 - m);
  m = std::clamp(m, 0.0, 1.0);
  return correct;
}

double StudentSim::mean_mastery() const {
  double s = 0.0;
  for (double m : mastery_) s += m;
  return s / static_cast<double>(mastery_.size());
}

int pick_exercise(const World& world, const StudentSim& sim, int last_concept, Rng& rng) {
  int chosen = -1;
  if (rng.bernoulli(world.spec.curriculum_prob)) {
    if (last_concept >= 0 && rng.bernoulli(world.spec.advance_prob)) {
      const auto& next = world.successors_of[static_cast<size_t>(last_concept)];
      if (!next.empty()) chosen = next[rng.uniform_int(next.size())];
    }
    if (chosen < 0) {
      // least mastered concept whose prerequisites are all learned
      double best = 2.0;
      for (int c = 0; c < world.spec.concepts; ++c) {
        if (sim.mastery(c) >= 0.9) continue;
        bool ready = true;
        for (int pre : world.prereqs_of[static_cast<size_t>(c)]) {
          if (sim.mastery(pre) < 0.5) {
            ready = false;
            break;
          }
        }
        if (ready && sim.mastery(c) < best) {
          best = sim.mastery(c);
          chosen = c;
        }
      }
    }
  }
  if (chosen < 0) {
    chosen = static_cast<int>(rng.uniform_int(static_cast<uint64_t>(world.spec.concepts)));
  }
  const auto& pool = world.concept_exercises[static_cast<size_t>(chosen)];
  return pool[rng.uniform_int(pool.size())];
}

std::vector<RawRecord> simulate_log(const World& world, int steps_per_student) {
  std::vector<RawRecord> records;
  records.reserve(static_cast<size_t>(world.spec.students) * steps_per_student);
  Rng base(world.spec.seed);
  for (int s = 0; s < world.spec.students; ++s) {
    Rng rng = base.derive(static_cast<uint64_t>(s) + 1);
    StudentSim sim(world, s);
    double t = 1.6e9 + static_cast<double>(s) * 1.0e7;
    int last_concept = -1;
    for (int step = 0; step < steps_per_student; ++step) {
      if (step > 0) {
        const double gap_s =
            rng.bernoulli(world.spec.session_break_prob)
                ? rng.lognormal(world.spec.session_gap_log_mean, world.spec.session_gap_log_sigma)
                : rng.lognormal(world.spec.gap_log_mean, world.spec.gap_log_sigma);
        t += gap_s;
        sim.elapse_days(gap_s / 86400.0);
      }
      const int exercise = pick_exercise(world, sim, last_concept, rng);
      last_concept = world.exercise_concept[static_cast<size_t>(exercise)];
      const double answer_s =
          rng.lognormal(world.spec.answer_log_mean, world.spec.answer_log_sigma);
      const int correct = sim.attempt(exercise, rng);
      RawRecord r;
      r.student = padded_id('s', s);
      r.exercise = padded_id('e', exercise);
      r.skill = padded_id('c', world.exercise_concept[static_cast<size_t>(exercise)]);
      r.correct = correct;
      r.answer_time_s = answer_s;
      r.timestamp_s = t;
      records.push_back(std::move(r));
    }
  }
  return records;
}

RecoveryScore score_p_recovery(const std::vector<std::pair<int, int>>& true_edges,
                               const Tensor& t_tilde, const PMatrix& p) {
  RecoveryScore score;
  const int k = t_tilde.rows();
  std::vector<uint8_t> truth(static_cast<size_t>(k) * k, 0);
  for (const auto& [i, j] : true_edges) {
    truth[static_cast<size_t>(i) * k + static_cast<size_t>(j)] = 1;
  }
  std::vector<double> scores;
  std::vector<int> labels;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      scores.push_back(t_tilde.at(i, j));
      labels.push_back(truth[static_cast<size_t>(i) * k + static_cast<size_t>(j)]);
    }
  }
  score.edge_auc = rank_auc(scores, labels);
  if (!true_edges.empty()) {
    long tp = 0, fp = 0, fn = 0;
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        if (i == j) continue;
        const bool pred = p.edge(i, j);
        const bool real = truth[static_cast<size_t>(i) * k + static_cast<size_t>(j)] != 0;
        tp += pred && real;
        fp += pred && !real;
        fn += !pred && real;
      }
    }
    if (tp + fp > 0) score.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    score.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  }
  return score;
}

void write_log_csv(const std::vector<RawRecord>& records, const std::string& path) {
  CsvWriter out(path);
  out.write_row({"student_id", "exercise_id", "concept_id", "correct", "answer_time",
                 "timestamp"});
  for (const RawRecord& r : records) {
    out.write_row({r.student, r.exercise, r.skill, std::to_string(r.correct),
                   fmt_double(r.answer_time_s, 6), fmt_double(r.timestamp_s, 12)});
  }
}

void write_ground_truth(const World& world, const std::string& path) {
  json edges = json::array();
  for (const auto& [i, j] : world.edges) edges.push_back(json::array({i, j}));
  json j{{"concepts", world.spec.concepts},
         {"exercises", world.spec.exercises},
         {"students", world.spec.students},
         {"seed", world.spec.seed},
         {"edges", std::move(edges)},
         {"abilities", world.ability},
         {"difficulties", world.exercise_difficulty}};
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace cpf
