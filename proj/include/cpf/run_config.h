#ifndef CPF_RUN_CONFIG_H
#define CPF_RUN_CONFIG_H

#include <string>

#include "cpf/config_json.h"
#include "cpf/synthetic.h"

namespace cpf {

/// One JSON document configuring every stage of a run. Unknown keys are
/// rejected; command-line flags override file values and the merged result
/// is written next to each command's outputs.
struct RunConfig {
  DiscretizerSpec disc;
  int window = 100;
  ColumnMapping columns;
  ModelConfig model;
  TrainConfig train;
  WorldSpec world;

  double gradcheck_h = 1e-5;
  double gradcheck_tol = 1e-4;
  int gradcheck_windows = 4;
  int gradcheck_window_len = 5;
};

RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});
nlohmann::json run_config_to_json(const RunConfig& c);

RunConfig load_run_config(const std::string& path);

/// Writes resolved_config.json into dir (creating it if needed).
void write_resolved_config(const RunConfig& config, const std::string& dir);

nlohmann::json world_spec_to_json(const WorldSpec& w);
WorldSpec world_spec_from_json(const nlohmann::json& j, WorldSpec base = {});

}  // namespace cpf

#endif
