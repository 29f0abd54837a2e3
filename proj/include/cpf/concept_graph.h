#ifndef CPF_CONCEPT_GRAPH_H
#define CPF_CONCEPT_GRAPH_H

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cpf/dataset.h"
#include "cpf/tensor.h"

namespace cpf {

/// Row-normalized counts of consecutive correct answers between distinct
/// concepts; the diagonal is forced to zero, so every row sums to 1 or 0.
struct AnswerMatrix {
  Tensor a;  // K x K
  int num_concepts() const { return a.rows(); }
};

/// Min-max normalization of the answer matrix plus its binarization at the
/// cube of the mean. A constant answer matrix degenerates to all zeros.
struct TransitionMatrix {
  Tensor t_tilde;              // K x K in [0, 1]
  std::vector<uint8_t> t;      // K x K binary, row-major
  real_t threshold = 0.0;
  bool degenerate = false;

  int num_concepts() const { return t_tilde.rows(); }
  bool edge(int i, int j) const {
    return t[static_cast<size_t>(i) * t_tilde.cols() + static_cast<size_t>(j)] != 0;
  }
};

/// Directed prerequisite relation: P[i][j] = 1 means i precedes j.
struct PMatrix {
  int k = 0;
  std::vector<uint8_t> p;                    // K x K row-major
  std::vector<std::vector<int>> prereqs_of;  // prereqs_of[c] = {i : P[i][c] = 1}

  static PMatrix empty(int k);
  static PMatrix from_edges(int k, const std::vector<std::pair<int, int>>& edges);

  bool edge(int i, int j) const {
    return p[static_cast<size_t>(i) * k + static_cast<size_t>(j)] != 0;
  }
  long edge_count() const;
  void rebuild_prereq_lists();
};

/// Count consecutive both-correct transitions between distinct concepts
/// within each student stream, then row-normalize.
AnswerMatrix build_answer_matrix(const std::vector<StudentStream>& streams, int n_concepts);

TransitionMatrix binarize_transitions(const AnswerMatrix& answer);

PMatrix derive_prerequisites(const TransitionMatrix& transitions);

/// Latest earlier step whose concept is a prerequisite of the concept at
/// step t; nullopt when none exists.
std::optional<int> nearest_prerequisite_step(std::span<const Step> steps, int t,
                                             const PMatrix& p);

struct ForgettingParams {
  real_t delta = 2.0;   // amplitude
  real_t lambda = 0.0;  // offset
};

/// w = delta / (1 + exp(dt + lambda)), dt in days. Strictly decreasing in
/// dt, bounded by delta / (1 + exp(lambda)), and w(0) = 1 at the defaults.
real_t forgetting_weight_from_days(real_t dt_days, const ForgettingParams& params);

/// Causal forgetting weight for step t given the nearest prerequisite step
/// m. Without a match the weight is 1. The time difference combines raw
/// answer and interval times of both steps, converted to days.
real_t forgetting_weight(std::span<const Step> steps, int t, std::optional<int> m,
                         const ForgettingParams& params);

/// Unordered concept-pair relation counts: both directions, one direction,
/// or neither present in the binary transition matrix.
struct RelationReport {
  long mutual = 0;
  long directed = 0;
  long unrelated = 0;
};

RelationReport relation_distribution(const TransitionMatrix& transitions);

struct GraphArtifacts {
  AnswerMatrix answer;
  TransitionMatrix transitions;
  PMatrix p;
};

GraphArtifacts build_concept_graph(const std::vector<StudentStream>& streams, int n_concepts);

/// Writes p_matrix.csv, t_tilde.csv, edges.json and relation_report.json.
void export_graph(const GraphArtifacts& graph, const std::vector<std::string>& concept_names,
                  const std::string& dir);

void write_matrix_csv(const Tensor& m, const std::string& path);

}  // namespace cpf

#endif
