#include "cpf/run_config.h"

#include <filesystem>
#include <fstream>

#include "cpf/error.h"

namespace cpf {

using nlohmann::json;

json world_spec_to_json(const WorldSpec& w) {
  return json{{"concepts", w.concepts},
              {"exercises", w.exercises},
              {"students", w.students},
              {"dag_edges", w.dag_edges},
              {"chain", w.chain},
              {"ability_min", w.ability_min},
              {"ability_max", w.ability_max},
              {"learn_rate", w.learn_rate},
              {"base_forget_rate", w.base_forget_rate},
              {"prerequisite_forget_coupling", w.prerequisite_forget_coupling},
              {"correctness_scale", w.correctness_scale},
              {"difficulty_min", w.difficulty_min},
              {"difficulty_max", w.difficulty_max},
              {"curriculum_prob", w.curriculum_prob},
              {"advance_prob", w.advance_prob},
              {"gap_log_mean", w.gap_log_mean},
              {"gap_log_sigma", w.gap_log_sigma},
              {"session_break_prob", w.session_break_prob},
              {"session_gap_log_mean", w.session_gap_log_mean},
              {"session_gap_log_sigma", w.session_gap_log_sigma},
              {"answer_log_mean", w.answer_log_mean},
              {"answer_log_sigma", w.answer_log_sigma},
              {"seed", w.seed}};
}

WorldSpec world_spec_from_json(const json& j, WorldSpec w) {
  require_keys(j,
               {"concepts", "exercises", "students", "dag_edges", "chain", "ability_min",
                "ability_max", "learn_rate", "base_forget_rate", "prerequisite_forget_coupling",
                "correctness_scale", "difficulty_min", "difficulty_max", "curriculum_prob",
                "advance_prob", "gap_log_mean", "gap_log_sigma", "session_break_prob",
                "session_gap_log_mean", "session_gap_log_sigma", "answer_log_mean",
                "answer_log_sigma", "seed"},
               "simulate config");
  if (j.contains("concepts")) w.concepts = j["concepts"].get<int>();
  if (j.contains("exercises")) w.exercises = j["exercises"].get<int>();
  if (j.contains("students")) w.students = j["students"].get<int>();
  if (j.contains("dag_edges")) w.dag_edges = j["dag_edges"].get<int>();
  if (j.contains("chain")) w.chain = j["chain"].get<bool>();
  if (j.contains("ability_min")) w.ability_min = j["ability_min"].get<double>();
  if (j.contains("ability_max")) w.ability_max = j["ability_max"].get<double>();
  if (j.contains("learn_rate")) w.learn_rate = j["learn_rate"].get<double>();
  if (j.contains("base_forget_rate")) w.base_forget_rate = j["base_forget_rate"].get<double>();
  if (j.contains("prerequisite_forget_coupling")) {
    w.prerequisite_forget_coupling = j["prerequisite_forget_coupling"].get<double>();
  }
  if (j.contains("correctness_scale")) w.correctness_scale = j["correctness_scale"].get<double>();
  if (j.contains("difficulty_min")) w.difficulty_min = j["difficulty_min"].get<double>();
  if (j.contains("difficulty_max")) w.difficulty_max = j["difficulty_max"].get<double>();
  if (j.contains("curriculum_prob")) w.curriculum_prob = j["curriculum_prob"].get<double>();
  if (j.contains("advance_prob")) w.advance_prob = j["advance_prob"].get<double>();
  if (j.contains("gap_log_mean")) w.gap_log_mean = j["gap_log_mean"].get<double>();
  if (j.contains("gap_log_sigma")) w.gap_log_sigma = j["gap_log_sigma"].get<double>();
  if (j.contains("session_break_prob")) w.session_break_prob = j["session_break_prob"].get<double>();
  if (j.contains("session_gap_log_mean")) {
    w.session_gap_log_mean = j["session_gap_log_mean"].get<double>();
  }
  if (j.contains("session_gap_log_sigma")) {
    w.session_gap_log_sigma = j["session_gap_log_sigma"].get<double>();
  }
  if (j.contains("answer_log_mean")) w.answer_log_mean = j["answer_log_mean"].get<double>();
  if (j.contains("answer_log_sigma")) w.answer_log_sigma = j["answer_log_sigma"].get<double>();
  if (j.contains("seed")) w.seed = j["seed"].get<uint64_t>();
  return w;
}

RunConfig run_config_from_json(const json& j, RunConfig c) {
  require_keys(j, {"data", "model", "train", "simulate", "gradcheck"}, "run config");
  if (j.contains("data")) data_config_from_json(j["data"], c.disc, c.window, c.columns);
  if (j.contains("model")) c.model = model_config_from_json(j["model"], c.model);
  if (j.contains("train")) c.train = train_config_from_json(j["train"], c.train);
  if (j.contains("simulate")) c.world = world_spec_from_json(j["simulate"], c.world);
  if (j.contains("gradcheck")) {
    const json& g = j["gradcheck"];
    require_keys(g, {"h", "tol", "windows", "window_len"}, "gradcheck config");
    if (g.contains("h")) c.gradcheck_h = g["h"].get<double>();
    if (g.contains("tol")) c.gradcheck_tol = g["tol"].get<double>();
    if (g.contains("windows")) c.gradcheck_windows = g["windows"].get<int>();
    if (g.contains("window_len")) c.gradcheck_window_len = g["window_len"].get<int>();
  }
  return c;
}

json run_config_to_json(const RunConfig& c) {
  return json{{"data", data_config_to_json(c.disc, c.window, c.columns)},
              {"model", model_config_to_json(c.model)},
              {"train", train_config_to_json(c.train)},
              {"simulate", world_spec_to_json(c.world)},
              {"gradcheck",
               json{{"h", c.gradcheck_h},
                    {"tol", c.gradcheck_tol},
                    {"windows", c.gradcheck_windows},
                    {"window_len", c.gradcheck_window_len}}}};
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed JSON in " + path + ": " + e.what());
  }
  return run_config_from_json(j);
}

void write_resolved_config(const RunConfig& config, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir + "/resolved_config.json");
  if (!out) throw DataError("cannot write resolved config in " + dir);
  out << run_config_to_json(config).dump(2) << "\n";
}

}  // namespace cpf
