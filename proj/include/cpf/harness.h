#ifndef CPF_HARNESS_H
#define CPF_HARNESS_H

#include <memory>

#include "cpf/cpf_model.h"
#include "cpf/gradcheck.h"
#include "cpf/trainer.h"

namespace cpf {

/// Deterministic small-scale fixture: a chain-prerequisite world simulated,
/// ingested and windowed, with the planted chain translated into the
/// dataset's concept indexing. The world seed is advanced until every
/// exercise and concept appears, so the requested dimensions always hold.
struct CellFixture {
  Dataset dataset;
  std::vector<StudentSequence> windows;  // first n_windows with >= 2 valid steps
  PMatrix p;
  ModelConfig config;  // counts and vocabularies filled from the dataset
  uint64_t world_seed = 0;
};

CellFixture make_cell_fixture(const ModelConfig& base, int n_windows, int window_len,
                              uint64_t seed);

/// Finite-difference check of the full training loss (mean BCE plus L2
/// penalty) through the complete cell, every parameter block included.
GradCheckReport run_cell_gradcheck(const ModelConfig& base, double h, double tol, int n_windows,
                                   int window_len, uint64_t seed, double l2_lambda);

}  // namespace cpf

#endif
