#include "cpf/dataset.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "cpf/error.h"
#include "cpf/rng.h"

namespace cpf {

using nlohmann::json;

int StudentSequence::valid_count() const {
  int n = 0;
  for (uint8_t m : mask) n += m;
  return n;
}

void DiscretizerSpec::validate() const {
  if (answer_time_cap_s <= 0 || interval_time_cap_min <= 0) {
    throw ConfigError("discretizer caps must be positive");
  }
  if (difficulty_buckets < 2 || accuracy_buckets < 2) {
    throw ConfigError("bucket counts must be at least 2");
  }
}

std::vector<int> running_accuracy_buckets(const std::vector<int>& corrects, int buckets) {
  std::vector<int> out(corrects.size());
  int seen_correct = 0;
  for (size_t t = 0; t < corrects.size(); ++t) {
    const double ratio = t == 0 ? 0.5 : static_cast<double>(seen_correct) / static_cast<double>(t);
    out[t] = std::clamp(static_cast<int>(ratio * buckets), 0, buckets - 1);
    seen_correct += corrects[t];
  }
  return out;
}

std::vector<StudentStream> discretize(const std::vector<IndexedRecord>& sorted_records,
                                      const DiscretizerSpec& spec) {
  std::vector<StudentStream> streams;
  double prev_ts = 0.0;
  for (const IndexedRecord& r : sorted_records) {
    if (streams.empty() || streams.back().student != r.student) {
      streams.push_back(StudentStream{r.student, {}});
    }
    StudentStream& s = streams.back();
    Step step;
    step.exercise = r.exercise;
    step.skill = r.skill;
    step.correct = r.correct;
    step.answer_raw_s = r.answer_time_s;
    step.answer_bucket =
        std::clamp(static_cast<int>(r.answer_time_s), 0, spec.answer_time_cap_s);
    if (s.steps.empty()) {
      step.interval_raw_s = 0.0;
      step.interval_bucket = 0;
    } else {
      const double gap_s = std::max(0.0, r.timestamp_s - prev_ts);
      step.interval_raw_s = gap_s;
      step.interval_bucket =
          std::clamp(static_cast<int>(gap_s / 60.0), 0, spec.interval_time_cap_min);
    }
    step.difficulty_bucket = spec.difficulty_buckets / 2;
    prev_ts = r.timestamp_s;
    s.steps.push_back(step);
  }
  for (StudentStream& s : streams) {
    std::vector<int> corrects(s.steps.size());
    for (size_t t = 0; t < s.steps.size(); ++t) corrects[t] = s.steps[t].correct;
    const std::vector<int> acc = running_accuracy_buckets(corrects, spec.accuracy_buckets);
    for (size_t t = 0; t < s.steps.size(); ++t) s.steps[t].accuracy_bucket = acc[t];
  }
  return streams;
}

DifficultyTable compute_exercise_difficulty(std::span<const StudentSequence> train_windows,
                                            int n_exercises, int buckets) {
  std::vector<long> attempts(static_cast<size_t>(n_exercises), 0);
  std::vector<long> corrects(static_cast<size_t>(n_exercises), 0);
  for (const StudentSequence& w : train_windows) {
    for (int t = 0; t < w.length(); ++t) {
      if (!w.mask[static_cast<size_t>(t)]) continue;
      const Step& s = w.steps[static_cast<size_t>(t)];
      ++attempts[static_cast<size_t>(s.exercise)];
      corrects[static_cast<size_t>(s.exercise)] += s.correct;
    }
  }
  DifficultyTable table;
  table.default_bucket = buckets / 2;
  table.bucket.resize(static_cast<size_t>(n_exercises), table.default_bucket);
  for (int e = 0; e < n_exercises; ++e) {
    if (attempts[static_cast<size_t>(e)] == 0) continue;
    const double difficulty = 1.0 - static_cast<double>(corrects[static_cast<size_t>(e)]) /
                                        static_cast<double>(attempts[static_cast<size_t>(e)]);
    table.bucket[static_cast<size_t>(e)] =
        std::clamp(static_cast<int>(difficulty * buckets), 0, buckets - 1);
  }
  return table;
}

void apply_difficulty(std::vector<StudentSequence>& windows, const DifficultyTable& table) {
  for (StudentSequence& w : windows) {
    for (int t = 0; t < w.length(); ++t) {
      Step& s = w.steps[static_cast<size_t>(t)];
      if (!w.mask[static_cast<size_t>(t)]) continue;
      if (s.exercise < 0 || s.exercise >= static_cast<int>(table.bucket.size())) {
        throw DataError("difficulty table has no entry for exercise " +
                        std::to_string(s.exercise) + "; dataset and table disagree");
      }
      s.difficulty_bucket = table.bucket[static_cast<size_t>(s.exercise)];
    }
  }
}

std::vector<StudentSequence> make_windows(const std::vector<StudentStream>& streams, int window,
                                          const std::vector<std::string>& student_names) {
  if (window <= 1) throw ConfigError("window length must exceed 1");
  std::vector<StudentSequence> out;
  for (const StudentStream& s : streams) {
    const int n = static_cast<int>(s.steps.size());
    int widx = 0;
    for (int start = 0; start < n; start += window, ++widx) {
      StudentSequence seq;
      seq.student = s.student;
      seq.student_id = student_names[static_cast<size_t>(s.student)];
      seq.window_index = widx;
      seq.steps.assign(static_cast<size_t>(window), Step{});
      seq.mask.assign(static_cast<size_t>(window), 0);
      const int count = std::min(window, n - start);
      for (int t = 0; t < count; ++t) {
        seq.steps[static_cast<size_t>(t)] = s.steps[static_cast<size_t>(start + t)];
        seq.mask[static_cast<size_t>(t)] = 1;
      }
      out.push_back(std::move(seq));
    }
  }
  return out;
}

std::vector<StudentStream> streams_from_windows(std::span<const StudentSequence> windows,
                                                const std::vector<int>* student_subset) {
  std::unordered_set<int> keep;
  if (student_subset) keep.insert(student_subset->begin(), student_subset->end());
  std::vector<const StudentSequence*> sorted;
  sorted.reserve(windows.size());
  for (const StudentSequence& w : windows) {
    if (!student_subset || keep.count(w.student)) sorted.push_back(&w);
  }
  std::sort(sorted.begin(), sorted.end(), [](const StudentSequence* a, const StudentSequence* b) {
    if (a->student != b->student) return a->student < b->student;
    return a->window_index < b->window_index;
  });
  std::vector<StudentStream> streams;
  for (const StudentSequence* w : sorted) {
    if (streams.empty() || streams.back().student != w->student) {
      streams.push_back(StudentStream{w->student, {}});
    }
    for (int t = 0; t < w->length(); ++t) {
      if (w->mask[static_cast<size_t>(t)]) {
        streams.back().steps.push_back(w->steps[static_cast<size_t>(t)]);
      }
    }
  }
  return streams;
}

std::vector<FoldSplit> kfold(int n_students, int k, uint64_t seed) {
  if (n_students < k) {
    throw std::invalid_argument("kfold: " + std::to_string(n_students) + " students for " +
                                std::to_string(k) + " folds");
  }
  std::vector<int> order(static_cast<size_t>(n_students));
  for (int i = 0; i < n_students; ++i) order[static_cast<size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<FoldSplit> folds;
  folds.reserve(static_cast<size_t>(k));
  for (int f = 0; f < k; ++f) {
    const int lo = static_cast<int>(static_cast<long>(f) * n_students / k);
    const int hi = static_cast<int>(static_cast<long>(f + 1) * n_students / k);
    FoldSplit split;
    std::vector<int> rest;
    for (int i = 0; i < n_students; ++i) {
      if (i >= lo && i < hi) {
        split.test.push_back(order[static_cast<size_t>(i)]);
      } else {
        rest.push_back(order[static_cast<size_t>(i)]);
      }
    }
    const int val_count = static_cast<int>(rest.size()) / 5;
    split.val.assign(rest.end() - val_count, rest.end());
    split.train.assign(rest.begin(), rest.end() - val_count);
    folds.push_back(std::move(split));
  }
  return folds;
}

Tensor incidence_from_concepts(const std::vector<int>& exercise_concept, int n_concepts) {
  const int n = static_cast<int>(exercise_concept.size());
  Tensor q({n, n_concepts});
  for (int e = 0; e < n; ++e) q.at(e, exercise_concept[static_cast<size_t>(e)]) = 1.0;
  return q;
}

QMatrix enhance_q_matrix(const Tensor& raw_incidence, real_t gamma) {
  if (raw_incidence.rank() != 2) {
    throw DataError("Q matrix must be rank 2, got " + raw_incidence.shape_str());
  }
  QMatrix q;
  q.gamma = gamma;
  q.entries = raw_incidence;
  for (int e = 0; e < raw_incidence.rows(); ++e) {
    int ones = 0;
    for (int c = 0; c < raw_incidence.cols(); ++c) {
      const real_t v = raw_incidence.at(e, c);
      if (v == 1.0) {
        ++ones;
      } else if (v == 0.0) {
        q.entries.at(e, c) = gamma;
      } else {
        throw DataError("Q matrix entry must be 0 or 1, found " + std::to_string(v));
      }
    }
    if (ones != 1) {
      throw DataError("Q matrix row " + std::to_string(e) + " has " + std::to_string(ones) +
                      " concepts; expected exactly one");
    }
  }
  return q;
}

Dataset ingest_records(const std::vector<RawRecord>& records, const DiscretizerSpec& spec,
                       int window) {
  spec.validate();
  std::vector<RawRecord> sorted = records;
  sort_records(sorted);
  const DatasetVocab vocab = build_vocab(sorted);
  const std::vector<IndexedRecord> indexed = index_records(sorted, vocab);
  const std::vector<StudentStream> streams = discretize(indexed, spec);

  Dataset ds;
  ds.meta.disc = spec;
  ds.meta.window = window;
  ds.meta.students = vocab.students;
  ds.meta.exercises = vocab.exercises;
  ds.meta.concepts = vocab.concepts;
  ds.meta.exercise_concept = vocab.exercise_concept;
  ds.meta.parsed = static_cast<long>(records.size());
  ds.windows = make_windows(streams, window, vocab.students);
  return ds;
}

namespace {

json meta_to_json(const DatasetMeta& m) {
  return json{{"answer_time_cap_s", m.disc.answer_time_cap_s},
              {"interval_time_cap_min", m.disc.interval_time_cap_min},
              {"difficulty_buckets", m.disc.difficulty_buckets},
              {"accuracy_buckets", m.disc.accuracy_buckets},
              {"window", m.window},
              {"students", m.students},
              {"exercises", m.exercises},
              {"concepts", m.concepts},
              {"exercise_concept", m.exercise_concept},
              {"parsed", m.parsed},
              {"dropped", m.dropped}};
}

DatasetMeta meta_from_json(const json& j) {
  DatasetMeta m;
  m.disc.answer_time_cap_s = j.at("answer_time_cap_s").get<int>();
  m.disc.interval_time_cap_min = j.at("interval_time_cap_min").get<int>();
  m.disc.difficulty_buckets = j.at("difficulty_buckets").get<int>();
  m.disc.accuracy_buckets = j.at("accuracy_buckets").get<int>();
  m.window = j.at("window").get<int>();
  m.students = j.at("students").get<std::vector<std::string>>();
  m.exercises = j.at("exercises").get<std::vector<std::string>>();
  m.concepts = j.at("concepts").get<std::vector<std::string>>();
  m.exercise_concept = j.at("exercise_concept").get<std::vector<int>>();
  m.parsed = j.at("parsed").get<long>();
  m.dropped = j.at("dropped").get<long>();
  return m;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream meta(dir + "/meta.json");
    if (!meta) throw DataError("cannot write " + dir + "/meta.json");
    meta << meta_to_json(ds.meta).dump(2) << "\n";
  }
  std::ofstream out(dir + "/dataset.jsonl");
  if (!out) throw DataError("cannot write " + dir + "/dataset.jsonl");
  for (const StudentSequence& w : ds.windows) {
    json line;
    line["student"] = w.student;
    line["window"] = w.window_index;
    json e = json::array(), c = json::array(), a = json::array(), atb = json::array(),
         itb = json::array(), df = json::array(), ac = json::array(), ats = json::array(),
         its = json::array(), mask = json::array();
    for (int t = 0; t < w.length(); ++t) {
      const Step& s = w.steps[static_cast<size_t>(t)];
      e.push_back(s.exercise);
      c.push_back(s.skill);
      a.push_back(s.correct);
      atb.push_back(s.answer_bucket);
      itb.push_back(s.interval_bucket);
      df.push_back(s.difficulty_bucket);
      ac.push_back(s.accuracy_bucket);
      ats.push_back(s.answer_raw_s);
      its.push_back(s.interval_raw_s);
      mask.push_back(static_cast<int>(w.mask[static_cast<size_t>(t)]));
    }
    line["e"] = std::move(e);
    line["c"] = std::move(c);
    line["a"] = std::move(a);
    line["at_b"] = std::move(atb);
    line["it_b"] = std::move(itb);
    line["df_b"] = std::move(df);
    line["ac_b"] = std::move(ac);
    line["at_s"] = std::move(ats);
    line["it_s"] = std::move(its);
    line["mask"] = std::move(mask);
    out << line.dump() << "\n";
  }
}

Dataset load_dataset(const std::string& dir) {
  Dataset ds;
  {
    std::ifstream meta(dir + "/meta.json");
    if (!meta) throw DataError("cannot read " + dir + "/meta.json");
    json j;
    meta >> j;
    ds.meta = meta_from_json(j);
  }
  std::ifstream in(dir + "/dataset.jsonl");
  if (!in) throw DataError("cannot read " + dir + "/dataset.jsonl");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    StudentSequence w;
    w.student = j.at("student").get<int>();
    w.student_id = ds.meta.students[static_cast<size_t>(w.student)];
    w.window_index = j.at("window").get<int>();
    const auto& e = j.at("e");
    const size_t n = e.size();
    w.steps.resize(n);
    w.mask.resize(n);
    for (size_t t = 0; t < n; ++t) {
      Step& s = w.steps[t];
      s.exercise = j.at("e")[t].get<int>();
      s.skill = j.at("c")[t].get<int>();
      s.correct = j.at("a")[t].get<int>();
      s.answer_bucket = j.at("at_b")[t].get<int>();
      s.interval_bucket = j.at("it_b")[t].get<int>();
      s.difficulty_bucket = j.at("df_b")[t].get<int>();
      s.accuracy_bucket = j.at("ac_b")[t].get<int>();
      s.answer_raw_s = j.at("at_s")[t].get<double>();
      s.interval_raw_s = j.at("it_s")[t].get<double>();
      w.mask[t] = static_cast<uint8_t>(j.at("mask")[t].get<int>());
    }
    ds.windows.push_back(std::move(w));
  }
  return ds;
}

}  // namespace cpf
