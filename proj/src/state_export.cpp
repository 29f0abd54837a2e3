#include "cpf/state_export.h"

#include <cctype>
#include <filesystem>

#include "cpf/csv.h"

namespace cpf {

namespace {

std::string filename_safe(const std::string& id) {
  std::string out;
  out.reserve(id.size());
  for (char c : id) {
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' ? c : '_');
  }
  return out.empty() ? "_" : out;
}

}  // namespace

void export_state_csvs(const CpfModel& model, std::span<const StudentSequence> windows,
                       const std::string& dir, int max_sequences) {
  std::filesystem::create_directories(dir);
  int exported = 0;
  for (const StudentSequence& window : windows) {
    if (max_sequences > 0 && exported >= max_sequences) break;
    if (window.valid_count() == 0) continue;
    Tape tape;
    CpfModel::ForwardOptions opts;
    opts.want_traces = true;
    const auto out = model.forward(tape, window, opts);

    const std::string name = dir + "/" + filename_safe(window.student_id) + "_w" +
                             std::to_string(window.window_index) + ".csv";
    CsvWriter csv(name);
    csv.write_row({"step", "exercise", "concept", "correct", "y", "pooled_state_norm", "w_f",
                   "gain_gate_mean", "forget_gate_mean"});
    for (const StepTrace& t : out.traces) {
      csv.write_row({std::to_string(t.step), std::to_string(t.exercise),
                     std::to_string(t.skill), std::to_string(t.correct),
                     t.prediction ? fmt_double(*t.prediction, 10) : "",
                     fmt_double(t.pooled_norm, 10), fmt_double(t.w_f, 10),
                     fmt_double(t.gain_gate_mean, 10), fmt_double(t.forget_gate_mean, 10)});
    }
    ++exported;
  }
}

}  // namespace cpf
