#ifndef CPF_SYNTHETIC_H
#define CPF_SYNTHETIC_H

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cpf/concept_graph.h"
#include "cpf/records.h"
#include "cpf/rng.h"

namespace cpf {

/// Ground-truth world: a prerequisite DAG over concepts, exercises bound
/// one-to-one to concepts, and heterogeneous student abilities. Dynamics
/// are deliberately simple so tests can reason about them independently of
/// any model: exponential decay between attempts, additive drag on
/// successors when a prerequisite decays, bounded mastery gain on practice.
struct WorldSpec {
  int concepts = 10;
  int exercises = 20;
  int students = 100;
  int dag_edges = 9;
  bool chain = false;  // chain c0 -> c1 -> ... overrides dag_edges
  double ability_min = 0.1;
  double ability_max = 0.9;
  double learn_rate = 0.3;
  double base_forget_rate = 0.15;  // per day
  double prerequisite_forget_coupling = 0.2;
  double correctness_scale = 5.0;
  double difficulty_min = 0.2;
  double difficulty_max = 0.8;
  double curriculum_prob = 0.75;   // coherent pick vs uniform noise
  double advance_prob = 0.5;       // follow an outgoing edge of the last concept
  // gaps are session-structured: mostly short within-session pauses with
  // occasional long between-session breaks
  double gap_log_mean = 7.6;       // log seconds, about 20 minutes median
  double gap_log_sigma = 0.8;
  double session_break_prob = 0.25;
  double session_gap_log_mean = 11.8;  // log seconds, about 1.5 days median
  double session_gap_log_sigma = 0.5;
  double answer_log_mean = 3.0;    // log seconds, about 20 s median
  double answer_log_sigma = 0.7;
  uint64_t seed = 1;
};

struct World {
  WorldSpec spec;
  std::vector<std::pair<int, int>> edges;        // prerequisite -> successor
  std::vector<int> exercise_concept;
  std::vector<double> exercise_difficulty;
  std::vector<double> ability;                   // per student
  std::vector<std::vector<int>> concept_exercises;
  std::vector<std::vector<int>> successors_of;   // successors_of[i] = {j : i -> j}
  std::vector<std::vector<int>> prereqs_of;      // prereqs_of[j]   = {i : i -> j}
};

/// Deterministic per seed. Throws std::invalid_argument when the requested
/// edge count exceeds the acyclic capacity K(K-1)/2.
World generate_world(const WorldSpec& spec);

/// Latent mastery dynamics for one student; usable standalone so tests can
/// drive fixed exercise schedules.
class StudentSim {
public:
  StudentSim(const World& world, int student);

  /// Decay all concepts over an idle gap; forgetting a prerequisite drags
  /// its successors by the coupling factor. Mastery stays in [0, 1].
  void elapse_days(double dt_days);

  double correct_probability(int exercise) const;

  /// Sample correctness, then apply the practice gain.
  int attempt(int exercise, Rng& rng);

  double mastery(int concept_idx) const { return mastery_[static_cast<size_t>(concept_idx)]; }
  double mean_mastery() const;

private:
  const World* world_;
  double ability_;
  std::vector<double> mastery_;
};

/// Pick the next exercise for a student. Curriculum-coherent picks either
/// advance along an outgoing edge of the last concept or target the least
/// mastered concept whose prerequisites are learned; the rest are uniform
/// noise. The forward bias is what makes prerequisite order observable in
/// transition counts, mirroring how sequenced coursework behaves.
int pick_exercise(const World& world, const StudentSim& sim, int last_concept, Rng& rng);

/// Simulated interaction log in the ingestion schema, sorted by student and
/// time. Fully deterministic per world seed.
std::vector<RawRecord> simulate_log(const World& world, int steps_per_student);

/// How well a recovered graph matches the planted one: AUC of the
/// normalized transition scores ranking true edges above non-edges, plus
/// precision/recall of the binary P matrix.
struct RecoveryScore {
  std::optional<double> edge_auc;
  std::optional<double> precision;
  std::optional<double> recall;
};

RecoveryScore score_p_recovery(const std::vector<std::pair<int, int>>& true_edges,
                               const Tensor& t_tilde, const PMatrix& p);

/// Log CSV in the ingestion schema plus ground_truth.json.
void write_log_csv(const std::vector<RawRecord>& records, const std::string& path);
void write_ground_truth(const World& world, const std::string& path);

}  // namespace cpf

#endif
