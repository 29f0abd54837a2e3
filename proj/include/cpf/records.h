#ifndef CPF_RECORDS_H
#define CPF_RECORDS_H

#include <string>
#include <unordered_map>
#include <vector>

namespace cpf {

/// Maps logical fields onto CSV column names so different log exports
/// ingest without code changes.
struct ColumnMapping {
  std::string student = "student_id";
  std::string exercise = "exercise_id";
  std::string skill = "concept_id";
  std::string correct = "correct";
  std::string answer_time = "answer_time";
  std::string timestamp = "timestamp";
};

/// One timestamped attempt as read from the log.
struct RawRecord {
  std::string student;
  std::string exercise;
  std::string skill;
  int correct = 0;            // 1 correct, 0 incorrect
  double answer_time_s = 0.0; // duration of the attempt
  double timestamp_s = 0.0;   // epoch seconds
};

struct ParseStats {
  long parsed = 0;
  long dropped = 0;
};

/// Read and validate the interaction log. Rows with missing, unparseable or
/// negative fields are dropped and counted. The result is stably sorted by
/// (student, timestamp). Throws ConfigError if a mapped column is absent.
std::vector<RawRecord> parse_interactions(const std::string& path, const ColumnMapping& columns,
                                          ParseStats* stats = nullptr);

/// Sort helper shared by parsing and the synthetic generator.
void sort_records(std::vector<RawRecord>& records);

/// Integer id spaces built from a sorted record stream. Ids are assigned in
/// first-appearance order, which makes the mapping reproducible. Exercises
/// keep the first concept they appear with.
struct DatasetVocab {
  std::vector<std::string> students;
  std::vector<std::string> exercises;
  std::vector<std::string> concepts;
  std::unordered_map<std::string, int> student_index;
  std::unordered_map<std::string, int> exercise_index;
  std::unordered_map<std::string, int> concept_index;
  std::vector<int> exercise_concept;  // exercise idx -> concept idx
  long concept_conflicts = 0;         // rows whose concept differed from first-seen

  int num_students() const { return static_cast<int>(students.size()); }
  int num_exercises() const { return static_cast<int>(exercises.size()); }
  int num_concepts() const { return static_cast<int>(concepts.size()); }
};

DatasetVocab build_vocab(const std::vector<RawRecord>& sorted_records);

/// Record with string ids replaced by vocab indices.
struct IndexedRecord {
  int student = 0;
  int exercise = 0;
  int skill = 0;
  int correct = 0;
  double answer_time_s = 0.0;
  double timestamp_s = 0.0;
};

std::vector<IndexedRecord> index_records(const std::vector<RawRecord>& sorted_records,
                                         const DatasetVocab& vocab);

}  // namespace cpf

#endif
