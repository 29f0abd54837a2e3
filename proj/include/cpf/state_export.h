#ifndef CPF_STATE_EXPORT_H
#define CPF_STATE_EXPORT_H

#include <span>
#include <string>

#include "cpf/cpf_model.h"

namespace cpf {

/// One CSV per sequence (named <student>_w<window>.csv) with per-step
/// columns: step, exercise, concept, correct, y, pooled_state_norm, w_f,
/// gain_gate_mean, forget_gate_mean. The y column is empty on each
/// window's first valid step. max_sequences 0 exports everything.
void export_state_csvs(const CpfModel& model, std::span<const StudentSequence> windows,
                       const std::string& dir, int max_sequences = 0);

}  // namespace cpf

#endif
