#ifndef CPF_DATASET_H
#define CPF_DATASET_H

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cpf/records.h"
#include "cpf/tensor.h"

namespace cpf {

/// Time and feature discretization. Caps bound the embedding vocabularies:
/// answer time is bucketed per second up to one hour, interval time per
/// minute up to thirty days.
struct DiscretizerSpec {
  int answer_time_cap_s = 3600;
  int interval_time_cap_min = 43200;
  int difficulty_buckets = 100;
  int accuracy_buckets = 100;

  int answer_vocab() const { return answer_time_cap_s + 1; }
  int interval_vocab() const { return interval_time_cap_min + 1; }

  /// Caps must be positive and bucket counts at least 2.
  void validate() const;
};

/// One interaction after discretization.
struct Step {
  int exercise = 0;
  int skill = 0;
  int correct = 0;
  int answer_bucket = 0;
  int interval_bucket = 0;
  int difficulty_bucket = 0;
  int accuracy_bucket = 0;
  double answer_raw_s = 0.0;
  double interval_raw_s = 0.0;
};

/// A student's full, unwindowed interaction stream in time order.
struct StudentStream {
  int student = 0;
  std::vector<Step> steps;
};

/// Fixed-length training window. Padded tail steps carry mask 0 and
/// all-zero features; valid steps always form a prefix.
struct StudentSequence {
  std::string student_id;
  int student = 0;
  int window_index = 0;
  std::vector<Step> steps;
  std::vector<uint8_t> mask;

  int length() const { return static_cast<int>(steps.size()); }
  int valid_count() const;
};

/// Bucket answer/interval times and attach running accuracy. Interval time
/// of each student's first step is 0. Difficulty buckets are left at the
/// neutral middle value here; training assigns them per fold.
std::vector<StudentStream> discretize(const std::vector<IndexedRecord>& sorted_records,
                                      const DiscretizerSpec& spec);

/// Accuracy bucket per step from the share of correct answers strictly
/// before it; the first step uses a 0.5 prior.
std::vector<int> running_accuracy_buckets(const std::vector<int>& corrects, int buckets);

/// Per-exercise difficulty buckets: floor((1 - correct_rate) * buckets),
/// clamped. Exercises unseen in the given windows get the middle bucket.
struct DifficultyTable {
  std::vector<int> bucket;
  int default_bucket = 0;
};

DifficultyTable compute_exercise_difficulty(std::span<const StudentSequence> train_windows,
                                            int n_exercises, int buckets);
void apply_difficulty(std::vector<StudentSequence>& windows, const DifficultyTable& table);

/// Split each stream into consecutive non-overlapping windows of length L,
/// zero-padding the last one.
std::vector<StudentSequence> make_windows(const std::vector<StudentStream>& streams, int window,
                                          const std::vector<std::string>& student_names);

/// Rebuild per-student streams from windows (optionally restricted to a
/// student subset), for fold-local statistics over the unwindowed stream.
std::vector<StudentStream> streams_from_windows(std::span<const StudentSequence> windows,
                                                const std::vector<int>* student_subset = nullptr);

/// Student-level 5-fold style cross-validation splits: per fold 20% of
/// students are test, the remaining 80% split 80/20 into train/val.
struct FoldSplit {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
};

std::vector<FoldSplit> kfold(int n_students, int k, uint64_t seed);

/// Exercise-concept incidence with zeros replaced by a small gamma.
struct QMatrix {
  Tensor entries;  // N x K, each entry gamma or 1, exactly one 1 per row
  real_t gamma = 0.0;

  int num_exercises() const { return entries.rows(); }
  int num_concepts() const { return entries.cols(); }
  std::span<const real_t> row(int exercise) const { return entries.row(exercise); }
};

/// Binary incidence from the one-concept-per-exercise map.
Tensor incidence_from_concepts(const std::vector<int>& exercise_concept, int n_concepts);

/// Validates one 1 per row, then replaces zeros with gamma.
QMatrix enhance_q_matrix(const Tensor& raw_incidence, real_t gamma);

/// Everything needed to interpret a windowed dataset.
struct DatasetMeta {
  DiscretizerSpec disc;
  int window = 100;
  std::vector<std::string> students;
  std::vector<std::string> exercises;
  std::vector<std::string> concepts;
  std::vector<int> exercise_concept;
  long parsed = 0;
  long dropped = 0;

  int num_students() const { return static_cast<int>(students.size()); }
  int num_exercises() const { return static_cast<int>(exercises.size()); }
  int num_concepts() const { return static_cast<int>(concepts.size()); }
};

struct Dataset {
  DatasetMeta meta;
  std::vector<StudentSequence> windows;
};

/// Full ingest: parse -> vocab -> discretize -> window.
Dataset ingest_records(const std::vector<RawRecord>& records, const DiscretizerSpec& spec,
                       int window);

void save_dataset(const Dataset& ds, const std::string& dir);
Dataset load_dataset(const std::string& dir);

}  // namespace cpf

#endif
