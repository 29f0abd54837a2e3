#include "cpf/concept_graph.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "cpf/csv.h"
#include "cpf/error.h"

namespace cpf {

using nlohmann::json;

PMatrix PMatrix::empty(int k_concepts) {
  PMatrix p;
  p.k = k_concepts;
  p.p.assign(static_cast<size_t>(k_concepts) * k_concepts, 0);
  p.prereqs_of.assign(static_cast<size_t>(k_concepts), {});
  return p;
}

PMatrix PMatrix::from_edges(int k_concepts, const std::vector<std::pair<int, int>>& edges) {
  PMatrix p = empty(k_concepts);
  for (const auto& [i, j] : edges) {
    if (i == j) continue;
    p.p[static_cast<size_t>(i) * k_concepts + static_cast<size_t>(j)] = 1;
  }
  p.rebuild_prereq_lists();
  return p;
}

long PMatrix::edge_count() const {
  long n = 0;
  for (uint8_t v : p) n += v;
  return n;
}

void PMatrix::rebuild_prereq_lists() {
  prereqs_of.assign(static_cast<size_t>(k), {});
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (edge(i, j)) prereqs_of[static_cast<size_t>(j)].push_back(i);
    }
  }
}

AnswerMatrix build_answer_matrix(const std::vector<StudentStream>& streams, int n_concepts) {
  Tensor counts({n_concepts, n_concepts});
  for (const StudentStream& s : streams) {
    for (size_t t = 1; t < s.steps.size(); ++t) {
      const Step& prev = s.steps[t - 1];
      const Step& cur = s.steps[t];
      if (prev.correct != 1 || cur.correct != 1) continue;
      if (prev.skill == cur.skill) continue;
      counts.at(prev.skill, cur.skill) += 1.0;
    }
  }
  AnswerMatrix answer;
  answer.a = Tensor({n_concepts, n_concepts});
  for (int i = 0; i < n_concepts; ++i) {
    real_t row_sum = 0.0;
    for (int j = 0; j < n_concepts; ++j) row_sum += counts.at(i, j);
    if (row_sum <= 0.0) continue;
    for (int j = 0; j < n_concepts; ++j) {
      if (i == j) continue;
      answer.a.at(i, j) = counts.at(i, j) / row_sum;
    }
  }
  return answer;
}

TransitionMatrix binarize_transitions(const AnswerMatrix& answer) {
  const int k = answer.num_concepts();
  TransitionMatrix tr;
  tr.t_tilde = Tensor({k, k});
  tr.t.assign(static_cast<size_t>(k) * k, 0);

  real_t lo = answer.a[0], hi = answer.a[0];
  for (int i = 0; i < answer.a.size(); ++i) {
    lo = std::min(lo, answer.a[i]);
    hi = std::max(hi, answer.a[i]);
  }
  if (hi <= lo) {
    tr.degenerate = true;
    std::cerr << "warning: constant answer matrix, transition matrix is all zero\n";
    return tr;
  }
  real_t mean = 0.0;
  for (int i = 0; i < answer.a.size(); ++i) {
    tr.t_tilde[i] = (answer.a[i] - lo) / (hi - lo);
    mean += tr.t_tilde[i];
  }
  mean /= static_cast<real_t>(answer.a.size());
  tr.threshold = mean * mean * mean;
  for (int i = 0; i < answer.a.size(); ++i) {
    if (tr.t_tilde[i] > tr.threshold) tr.t[static_cast<size_t>(i)] = 1;
  }
  return tr;
}

PMatrix derive_prerequisites(const TransitionMatrix& transitions) {
  const int k = transitions.num_concepts();
  PMatrix p = PMatrix::empty(k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      if (transitions.edge(i, j) && !transitions.edge(j, i)) {
        p.p[static_cast<size_t>(i) * k + static_cast<size_t>(j)] = 1;
      }
    }
  }
  p.rebuild_prereq_lists();
  return p;
}

std::optional<int> nearest_prerequisite_step(std::span<const Step> steps, int t,
                                             const PMatrix& p) {
  const int target = steps[static_cast<size_t>(t)].skill;
  for (int m = t - 1; m >= 0; --m) {
    if (p.edge(steps[static_cast<size_t>(m)].skill, target)) return m;
  }
  return std::nullopt;
}

real_t forgetting_weight_from_days(real_t dt_days, const ForgettingParams& params) {
  // delta * exp(-x) / (1 + exp(-x)) never overflows for x >= 0 and equals
  // delta / (1 + exp(x)) exactly.
  const real_t x = dt_days + params.lambda;
  if (x >= 0.0) {
    const real_t e = std::exp(-x);
    return params.delta * e / (1.0 + e);
  }
  return params.delta / (1.0 + std::exp(x));
}

real_t forgetting_weight(std::span<const Step> steps, int t, std::optional<int> m,
                         const ForgettingParams& params) {
  if (!m.has_value()) return 1.0;
  const Step& cur = steps[static_cast<size_t>(t)];
  const Step& pre = steps[static_cast<size_t>(*m)];
  const real_t dt_s = std::fabs((cur.answer_raw_s + cur.interval_raw_s) -
                                (pre.answer_raw_s + pre.interval_raw_s));
  return forgetting_weight_from_days(dt_s / 86400.0, params);
}

RelationReport relation_distribution(const TransitionMatrix& transitions) {
  RelationReport report;
  const int k = transitions.num_concepts();
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      const bool ij = transitions.edge(i, j);
      const bool ji = transitions.edge(j, i);
      if (ij && ji) {
        ++report.mutual;
      } else if (ij || ji) {
        ++report.directed;
      } else {
        ++report.unrelated;
      }
    }
  }
  return report;
}

GraphArtifacts build_concept_graph(const std::vector<StudentStream>& streams, int n_concepts) {
  GraphArtifacts g;
  g.answer = build_answer_matrix(streams, n_concepts);
  g.transitions = binarize_transitions(g.answer);
  g.p = derive_prerequisites(g.transitions);
  return g;
}

void write_matrix_csv(const Tensor& m, const std::string& path) {
  CsvWriter out(path);
  std::vector<std::string> row(static_cast<size_t>(m.cols()));
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) row[static_cast<size_t>(j)] = fmt_double(m.at(i, j));
    out.write_row(row);
  }
}

void export_graph(const GraphArtifacts& graph, const std::vector<std::string>& concept_names,
                  const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_matrix_csv(graph.transitions.t_tilde, dir + "/t_tilde.csv");

  const int k = graph.p.k;
  Tensor pm({k, k});
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) pm.at(i, j) = graph.p.edge(i, j) ? 1.0 : 0.0;
  }
  write_matrix_csv(pm, dir + "/p_matrix.csv");

  json edges = json::array();
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (!graph.p.edge(i, j)) continue;
      edges.push_back(json{{"from", concept_names[static_cast<size_t>(i)]},
                           {"to", concept_names[static_cast<size_t>(j)]},
                           {"from_index", i},
                           {"to_index", j},
                           {"weight", graph.transitions.t_tilde.at(i, j)}});
    }
  }
  {
    std::ofstream out(dir + "/edges.json");
    out << edges.dump(2) << "\n";
  }
  const RelationReport report = relation_distribution(graph.transitions);
  json rj{{"concepts", k},
          {"mutual", report.mutual},
          {"directed", report.directed},
          {"unrelated", report.unrelated},
          {"threshold", graph.transitions.threshold},
          {"p_edges", graph.p.edge_count()}};
  std::ofstream out(dir + "/relation_report.json");
  out << rj.dump(2) << "\n";
}

}  // namespace cpf
