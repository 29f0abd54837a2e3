#include "cpf/records.h"

#include <algorithm>
#include <charconv>

#include "cpf/csv.h"
#include "cpf/error.h"

namespace cpf {

namespace {

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

bool parse_correct(const std::string& s, int& out) {
  double v;
  if (!parse_double(s, v)) return false;
  if (v == 0.0) {
    out = 0;
    return true;
  }
  if (v == 1.0) {
    out = 1;
    return true;
  }
  return false;
}

}  // namespace

void sort_records(std::vector<RawRecord>& records) {
  std::stable_sort(records.begin(), records.end(), [](const RawRecord& a, const RawRecord& b) {
    if (a.student != b.student) return a.student < b.student;
    return a.timestamp_s < b.timestamp_s;
  });
}

std::vector<RawRecord> parse_interactions(const std::string& path, const ColumnMapping& columns,
                                          ParseStats* stats) {
  const CsvTable table = read_csv(path);
  const int c_student = table.column(columns.student);
  const int c_exercise = table.column(columns.exercise);
  const int c_concept = table.column(columns.skill);
  const int c_correct = table.column(columns.correct);
  const int c_answer = table.column(columns.answer_time);
  const int c_ts = table.column(columns.timestamp);
  for (const auto& [name, idx] :
       std::initializer_list<std::pair<std::string, int>>{{columns.student, c_student},
                                                          {columns.exercise, c_exercise},
                                                          {columns.skill, c_concept},
                                                          {columns.correct, c_correct},
                                                          {columns.answer_time, c_answer},
                                                          {columns.timestamp, c_ts}}) {
    if (idx < 0) throw ConfigError("mapped column not found in CSV header: " + name);
  }

  std::vector<RawRecord> records;
  records.reserve(table.rows.size());
  long dropped = 0;
  const size_t needed = static_cast<size_t>(
      std::max({c_student, c_exercise, c_concept, c_correct, c_answer, c_ts})) + 1;
  for (const auto& row : table.rows) {
    if (row.size() < needed) {
      ++dropped;
      continue;
    }
    RawRecord r;
    r.student = row[static_cast<size_t>(c_student)];
    r.exercise = row[static_cast<size_t>(c_exercise)];
    r.skill = row[static_cast<size_t>(c_concept)];
    if (r.student.empty() || r.exercise.empty() || r.skill.empty() ||
        !parse_correct(row[static_cast<size_t>(c_correct)], r.correct) ||
        !parse_double(row[static_cast<size_t>(c_answer)], r.answer_time_s) ||
        !parse_double(row[static_cast<size_t>(c_ts)], r.timestamp_s) || r.answer_time_s < 0.0) {
      ++dropped;
      continue;
    }
    records.push_back(std::move(r));
  }
  sort_records(records);
  if (stats) {
    stats->parsed = static_cast<long>(records.size());
    stats->dropped = dropped;
  }
  return records;
}

DatasetVocab build_vocab(const std::vector<RawRecord>& sorted_records) {
  DatasetVocab v;
  for (const RawRecord& r : sorted_records) {
    if (!v.student_index.count(r.student)) {
      v.student_index[r.student] = v.num_students();
      v.students.push_back(r.student);
    }
    int concept_idx;
    auto cit = v.concept_index.find(r.skill);
    if (cit == v.concept_index.end()) {
      concept_idx = v.num_concepts();
      v.concept_index[r.skill] = concept_idx;
      v.concepts.push_back(r.skill);
    } else {
      concept_idx = cit->second;
    }
    auto eit = v.exercise_index.find(r.exercise);
    if (eit == v.exercise_index.end()) {
      v.exercise_index[r.exercise] = v.num_exercises();
      v.exercises.push_back(r.exercise);
      v.exercise_concept.push_back(concept_idx);
    } else if (v.exercise_concept[static_cast<size_t>(eit->second)] != concept_idx) {
      // one concept per exercise: first appearance wins
      ++v.concept_conflicts;
    }
  }
  return v;
}

std::vector<IndexedRecord> index_records(const std::vector<RawRecord>& sorted_records,
                                         const DatasetVocab& vocab) {
  std::vector<IndexedRecord> out;
  out.reserve(sorted_records.size());
  for (const RawRecord& r : sorted_records) {
    IndexedRecord ir;
    ir.student = vocab.student_index.at(r.student);
    ir.exercise = vocab.exercise_index.at(r.exercise);
    ir.skill = vocab.exercise_concept[static_cast<size_t>(ir.exercise)];
    ir.correct = r.correct;
    ir.answer_time_s = r.answer_time_s;
    ir.timestamp_s = r.timestamp_s;
    out.push_back(ir);
  }
  return out;
}

}  // namespace cpf
