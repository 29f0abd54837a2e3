#ifndef CPF_CHECKPOINT_H
#define CPF_CHECKPOINT_H

#include <memory>
#include <string>

#include "cpf/cpf_model.h"

namespace cpf {

struct CheckpointExtras {
  long adam_step = 0;
  uint64_t seed = 0;
  int fold = 0;
  std::vector<int> difficulty_table;  // per-exercise bucket from the training fold
};

/// Single JSON file holding the model config, exercise-concept map, P
/// matrix edges, every parameter tensor with its Adam moments, the
/// optimizer step count and the run seed. Doubles round-trip bit-exactly.
void save_checkpoint(const CpfModel& model, const CheckpointExtras& extras,
                     const std::string& path);

struct Checkpoint {
  std::unique_ptr<CpfModel> model;
  CheckpointExtras extras;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace cpf

#endif
