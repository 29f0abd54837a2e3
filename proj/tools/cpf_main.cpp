// Command-line front end: ingest -> build-graph -> train -> eval ->
// export, plus verification commands (gradcheck, simulate,
// cross-validate). Logs go to stderr; every artifact-producing command
// writes its fully resolved configuration next to its outputs, and reruns
// with identical config and seed produce byte-identical artifacts.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <unordered_set>

#include <json.hpp>

#include "cpf/checkpoint.h"
#include "cpf/cross_validation.h"
#include "cpf/csv.h"
#include "cpf/error.h"
#include "cpf/harness.h"
#include "cpf/run_config.h"
#include "cpf/state_export.h"
#include "cpf/synthetic.h"
#include "cpf/trainer.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cpf;

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<std::string> ablation;
  std::optional<std::string> mode;
  std::optional<int> k_window;
  int fold = 0;
};

RunConfig resolve_config(const CommonFlags& flags) {
  RunConfig config;
  if (!flags.config_path.empty()) config = load_run_config(flags.config_path);
  if (flags.seed) {
    config.train.seed = *flags.seed;
    config.world.seed = *flags.seed;
  }
  if (flags.ablation) config.model.ablation = ablation_from_string(*flags.ablation);
  if (flags.mode) config.model.mode = mode_from_string(*flags.mode);
  if (flags.k_window) config.model.review_window = *flags.k_window;
  return config;
}

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool with_fold = false) {
  cmd->add_option("--config", flags.config_path, "JSON run configuration");
  cmd->add_option("--seed", flags.seed, "override every seed in the configuration");
  cmd->add_option("--ablation", flags.ablation, "model variant: full, P, I, L or FP");
  cmd->add_option("--mode", flags.mode, "cell type: cpf or lpkt");
  cmd->add_option("--k-window", flags.k_window, "review window size");
  if (with_fold) cmd->add_option("--fold", flags.fold, "cross-validation fold index");
}

struct FoldWindows {
  FoldData data;
  FoldSplit split;
};

FoldWindows fold_windows(const Dataset& ds, const RunConfig& config, int fold, int n_folds = 5) {
  if (fold < 0 || fold >= n_folds) throw ConfigError("fold index out of range");
  const auto splits = kfold(ds.meta.num_students(), n_folds, config.train.seed);
  const ModelConfig mc = config_for_dataset(config.model, ds.meta);
  FoldWindows fw;
  fw.split = splits[static_cast<size_t>(fold)];
  fw.data = prepare_fold(ds, fw.split, mc);
  return fw;
}

PMatrix load_p_matrix_csv(const std::string& path, int k) {
  const CsvTable table = read_csv(path);
  // matrix CSVs have no header; read_csv treats the first row as one
  std::vector<std::vector<std::string>> rows;
  rows.push_back(table.header);
  for (const auto& r : table.rows) rows.push_back(r);
  if (static_cast<int>(rows.size()) != k) {
    throw DataError("P matrix CSV has " + std::to_string(rows.size()) + " rows, expected " +
                    std::to_string(k));
  }
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < k; ++i) {
    if (static_cast<int>(rows[static_cast<size_t>(i)].size()) != k) {
      throw DataError("P matrix CSV row " + std::to_string(i) + " has wrong width");
    }
    for (int j = 0; j < k; ++j) {
      if (std::stod(rows[static_cast<size_t>(i)][static_cast<size_t>(j)]) != 0.0) {
        edges.emplace_back(i, j);
      }
    }
  }
  return PMatrix::from_edges(k, edges);
}

int cmd_simulate(const CommonFlags& flags, const std::string& out_dir, int students, int steps,
                 int concepts, int exercises, int edges, bool chain) {
  RunConfig config = resolve_config(flags);
  if (students > 0) config.world.students = students;
  if (concepts > 0) config.world.concepts = concepts;
  if (exercises > 0) config.world.exercises = exercises;
  if (edges >= 0) config.world.dag_edges = edges;
  if (chain) config.world.chain = true;

  const World world = generate_world(config.world);
  const auto records = simulate_log(world, steps);
  fs::create_directories(out_dir);
  write_log_csv(records, out_dir + "/log.csv");
  write_ground_truth(world, out_dir + "/ground_truth.json");
  write_resolved_config(config, out_dir);
  std::cerr << "simulate: " << records.size() << " interactions for " << config.world.students
            << " students -> " << out_dir << "\n";
  return 0;
}

int cmd_ingest(const CommonFlags& flags, const std::string& in_path,
               const std::string& out_dir) {
  const RunConfig config = resolve_config(flags);
  ParseStats stats;
  const auto records = parse_interactions(in_path, config.columns, &stats);
  Dataset ds = ingest_records(records, config.disc, config.window);
  ds.meta.dropped = stats.dropped;
  save_dataset(ds, out_dir);
  write_resolved_config(config, out_dir);
  std::cerr << "ingest: " << stats.parsed << " records (" << stats.dropped << " dropped), "
            << ds.meta.num_students() << " students, " << ds.meta.num_exercises()
            << " exercises, " << ds.meta.num_concepts() << " concepts, " << ds.windows.size()
            << " windows -> " << out_dir << "\n";
  return 0;
}

int cmd_build_graph(const CommonFlags& flags, const std::string& in_path,
                    const std::string& out_dir) {
  const RunConfig config = resolve_config(flags);
  auto records = parse_interactions(in_path, config.columns, nullptr);
  const DatasetVocab vocab = build_vocab(records);
  // transition counting runs over the unwindowed per-student streams
  const auto streams = discretize(index_records(records, vocab), config.disc);
  const GraphArtifacts graph = build_concept_graph(streams, vocab.num_concepts());
  export_graph(graph, vocab.concepts, out_dir);
  write_resolved_config(config, out_dir);
  std::cerr << "build-graph: " << vocab.num_concepts() << " concepts, "
            << graph.p.edge_count() << " prerequisite edges -> " << out_dir << "\n";
  return 0;
}

void write_train_log_csv(const std::vector<EpochLog>& log, const std::string& path) {
  CsvWriter out(path);
  out.write_row({"epoch", "train_loss", "val_auc", "val_acc", "val_rmse", "val_r2"});
  for (const EpochLog& e : log) {
    out.write_row({std::to_string(e.epoch), fmt_double(e.train_loss, 10),
                   e.val.auc ? fmt_double(*e.val.auc, 10) : "",
                   fmt_double(e.val.acc, 10), fmt_double(e.val.rmse, 10),
                   e.val.r2 ? fmt_double(*e.val.r2, 10) : ""});
  }
}

int cmd_train(const CommonFlags& flags, const std::string& data_dir, const std::string& out_dir,
              const std::string& p_matrix_path) {
  RunConfig config = resolve_config(flags);
  const Dataset ds = load_dataset(data_dir);
  FoldWindows fw = fold_windows(ds, config, flags.fold);
  const ModelConfig mc = config_for_dataset(config.model, ds.meta);
  PMatrix p = std::move(fw.data.p);
  if (!p_matrix_path.empty()) p = load_p_matrix_csv(p_matrix_path, mc.k_concepts);

  CpfModel model(mc, ds.meta.exercise_concept, p, config.train.seed);
  TrainResult tr = train(model, fw.data.train, fw.data.val, config.train);
  const MetricsReport test = evaluate(model, fw.data.test);

  fs::create_directories(out_dir);
  const DifficultyTable difficulty = compute_exercise_difficulty(
      fw.data.train, ds.meta.num_exercises(), ds.meta.disc.difficulty_buckets);
  CheckpointExtras extras;
  extras.adam_step = tr.adam_steps;
  extras.seed = config.train.seed;
  extras.fold = flags.fold;
  extras.difficulty_table = difficulty.bucket;
  save_checkpoint(model, extras, out_dir + "/checkpoint.cpf");
  write_train_log_csv(tr.log, out_dir + "/train_log.csv");
  {
    json j;
    j["fold"] = flags.fold;
    j["best_epoch"] = tr.best_epoch;
    j["val"] = metrics_to_json(tr.best_val);
    j["test"] = metrics_to_json(test);
    std::ofstream out(out_dir + "/metrics.json");
    out << j.dump(2) << "\n";
  }
  write_resolved_config(config, out_dir);
  std::cerr << "train: fold " << flags.fold << ", best epoch " << tr.best_epoch << ", test acc "
            << test.acc << (test.auc ? ", test auc " + std::to_string(*test.auc) : "") << " -> "
            << out_dir << "\n";
  return 0;
}

int cmd_eval(const CommonFlags& flags, const std::string& checkpoint_path,
             const std::string& data_dir, const std::string& out_dir) {
  RunConfig config = resolve_config(flags);
  const Dataset ds = load_dataset(data_dir);
  Checkpoint ckpt = load_checkpoint(checkpoint_path);
  config.train.seed = ckpt.extras.seed;

  const auto splits = kfold(ds.meta.num_students(), 5, ckpt.extras.seed);
  const int fold = ckpt.extras.fold;
  std::vector<StudentSequence> test;
  {
    std::unordered_set<int> test_set(splits[static_cast<size_t>(fold)].test.begin(),
                                     splits[static_cast<size_t>(fold)].test.end());
    for (const StudentSequence& w : ds.windows) {
      if (test_set.count(w.student)) test.push_back(w);
    }
  }
  if (!ckpt.extras.difficulty_table.empty()) {
    DifficultyTable table;
    table.bucket = ckpt.extras.difficulty_table;
    table.default_bucket = ds.meta.disc.difficulty_buckets / 2;
    apply_difficulty(test, table);
  }
  const MetricsReport m = evaluate(*ckpt.model, test);
  fs::create_directories(out_dir);
  {
    json j = metrics_to_json(m);
    j["fold"] = fold;
    j["checkpoint"] = fs::path(checkpoint_path).filename().string();
    std::ofstream out(out_dir + "/metrics.json");
    out << j.dump(2) << "\n";
  }
  write_resolved_config(config, out_dir);
  std::cerr << "eval: fold " << fold << " test windows " << test.size() << ", acc " << m.acc
            << (m.auc ? ", auc " + std::to_string(*m.auc) : "") << " -> " << out_dir << "\n";
  return 0;
}

int cmd_cross_validate(const CommonFlags& flags, const std::string& data_dir,
                       const std::string& out_dir, const std::string& k_grid_arg) {
  RunConfig config = resolve_config(flags);
  const Dataset ds = load_dataset(data_dir);
  fs::create_directories(out_dir);

  if (!k_grid_arg.empty()) {
    std::vector<int> grid;
    std::stringstream ss(k_grid_arg);
    std::string item;
    while (std::getline(ss, item, ',')) grid.push_back(std::stoi(item));
    const auto sweep = k_window_sweep(ds, config.model, config.train, grid);
    write_k_sensitivity_csv(sweep, out_dir + "/k_sensitivity.csv");
    write_k_sensitivity_json(sweep, out_dir + "/k_sensitivity.json");
    for (const auto& [k, cv] : sweep) {
      write_cv_metrics_json(cv, out_dir + "/cv_metrics_k" + std::to_string(k) + ".jsonl");
    }
    write_resolved_config(config, out_dir);
    std::cerr << "cross-validate: review-window grid of " << sweep.size() << " settings -> "
              << out_dir << "\n";
    return 0;
  }

  const CvResult cv = cross_validate(ds, config.model, config.train);
  write_cv_metrics_json(cv, out_dir + "/cv_metrics.jsonl");
  {
    json j;
    j["mean"] = metrics_to_json(cv.mean);
    json folds = json::array();
    for (const auto& f : cv.folds) {
      json fj = metrics_to_json(f.test);
      fj["fold"] = f.fold;
      fj["best_epoch"] = f.best_epoch;
      folds.push_back(fj);
    }
    j["folds"] = std::move(folds);
    std::ofstream out(out_dir + "/summary.json");
    out << j.dump(2) << "\n";
  }
  write_resolved_config(config, out_dir);
  std::cerr << "cross-validate: mean acc " << cv.mean.acc
            << (cv.mean.auc ? ", mean auc " + std::to_string(*cv.mean.auc) : "") << " -> "
            << out_dir << "\n";
  return 0;
}

int cmd_gradcheck(const CommonFlags& flags, const std::string& out_dir) {
  RunConfig config = resolve_config(flags);
  ModelConfig mc = config.model;
  if (mc.n_exercises == 0) {  // desk-scale defaults when no config is given
    mc.n_exercises = 6;
    mc.k_concepts = 4;
    mc.d = 8;
    mc.d_a = 4;
    mc.answer_time_vocab = 9;
    mc.interval_time_vocab = 9;
    mc.difficulty_buckets = 6;
    mc.accuracy_buckets = 6;
    mc.review_window = 3;
  }
  const GradCheckReport report =
      run_cell_gradcheck(mc, config.gradcheck_h, config.gradcheck_tol, config.gradcheck_windows,
                         config.gradcheck_window_len, config.train.seed, config.train.l2_lambda);
  std::cerr << report.to_string();
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    json blocks = json::array();
    for (const auto& b : report.blocks) {
      blocks.push_back(json{{"name", b.name},
                            {"entries", b.entries},
                            {"max_rel_err", b.max_rel_err},
                            {"max_abs_err", b.max_abs_err},
                            {"pass", b.pass}});
    }
    json j{{"h", report.h},
           {"tol", report.tol},
           {"worst_rel_err", report.worst_rel_err},
           {"pass", report.pass},
           {"blocks", std::move(blocks)}};
    std::ofstream out(out_dir + "/gradcheck_report.json");
    out << j.dump(2) << "\n";
    write_resolved_config(config, out_dir);
  }
  return report.pass ? 0 : 1;
}

int cmd_export_states(const CommonFlags& flags, const std::string& checkpoint_path,
                      const std::string& data_dir, const std::string& out_dir,
                      int max_sequences) {
  RunConfig config = resolve_config(flags);
  const Dataset ds = load_dataset(data_dir);
  Checkpoint ckpt = load_checkpoint(checkpoint_path);

  std::vector<StudentSequence> windows = ds.windows;
  if (!ckpt.extras.difficulty_table.empty()) {
    DifficultyTable table;
    table.bucket = ckpt.extras.difficulty_table;
    table.default_bucket = ds.meta.disc.difficulty_buckets / 2;
    apply_difficulty(windows, table);
  }
  export_state_csvs(*ckpt.model, windows, out_dir, max_sequences);
  write_resolved_config(config, out_dir);
  std::cerr << "export-states: "
            << (max_sequences > 0 ? std::min<size_t>(windows.size(),
                                                     static_cast<size_t>(max_sequences))
                                  : windows.size())
            << " sequences -> " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"concept-driven personalized-forgetting knowledge tracing"};
  app.require_subcommand(1);

  CommonFlags flags;

  // simulate
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic interaction log");
  std::string sim_out = "sim";
  int sim_students = 0, sim_steps = 50, sim_concepts = 0, sim_exercises = 0, sim_edges = -1;
  bool sim_chain = false;
  add_common_flags(simulate, flags);
  simulate->add_option("--out", sim_out, "output directory");
  simulate->add_option("--students", sim_students, "number of students");
  simulate->add_option("--steps", sim_steps, "interactions per student");
  simulate->add_option("--concepts", sim_concepts, "number of concepts");
  simulate->add_option("--exercises", sim_exercises, "number of exercises");
  simulate->add_option("--edges", sim_edges, "prerequisite edge count");
  simulate->add_flag("--chain", sim_chain, "chain prerequisite structure");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "parse a CSV log into the windowed dataset");
  std::string in_path, ingest_out = "data";
  add_common_flags(ingest, flags);
  ingest->add_option("--in", in_path, "input CSV log")->required();
  ingest->add_option("--out", ingest_out, "output dataset directory");

  // build-graph
  auto* graph = app.add_subcommand("build-graph", "derive the concept prerequisite relation");
  std::string graph_in, graph_out = "graph";
  add_common_flags(graph, flags);
  graph->add_option("--in", graph_in, "input CSV log")->required();
  graph->add_option("--out", graph_out, "output directory");

  // train
  auto* train_cmd = app.add_subcommand("train", "train on one fold of a dataset");
  std::string train_data, train_out = "run", train_p;
  add_common_flags(train_cmd, flags, true);
  train_cmd->add_option("--data", train_data, "dataset directory")->required();
  train_cmd->add_option("--out", train_out, "output directory");
  train_cmd->add_option("--p-matrix", train_p, "override the prerequisite matrix (K x K CSV)");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on its test fold");
  std::string eval_ckpt, eval_data, eval_out = "eval";
  add_common_flags(eval_cmd, flags);
  eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  eval_cmd->add_option("--data", eval_data, "dataset directory")->required();
  eval_cmd->add_option("--out", eval_out, "output directory");

  // cross-validate
  auto* cv_cmd = app.add_subcommand("cross-validate", "5-fold cross-validation");
  std::string cv_data, cv_out = "cv", cv_grid;
  add_common_flags(cv_cmd, flags);
  cv_cmd->add_option("--data", cv_data, "dataset directory")->required();
  cv_cmd->add_option("--out", cv_out, "output directory");
  cv_cmd->add_option("--k-grid", cv_grid, "comma-separated review-window sizes");

  // gradcheck
  auto* gc_cmd = app.add_subcommand("gradcheck", "finite-difference check of the full cell");
  std::string gc_out;
  add_common_flags(gc_cmd, flags);
  gc_cmd->add_option("--out", gc_out, "optional report directory");

  // export-states
  auto* ex_cmd = app.add_subcommand("export-states", "per-sequence knowledge-state traces");
  std::string ex_ckpt, ex_data, ex_out = "states";
  int ex_max = 0;
  add_common_flags(ex_cmd, flags);
  ex_cmd->add_option("--checkpoint", ex_ckpt, "checkpoint file")->required();
  ex_cmd->add_option("--data", ex_data, "dataset directory")->required();
  ex_cmd->add_option("--out", ex_out, "output directory");
  ex_cmd->add_option("--max-sequences", ex_max, "limit exported sequences (0 = all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help() << "\n";
    return 2;
  }

  try {
    if (simulate->parsed()) {
      return cmd_simulate(flags, sim_out, sim_students, sim_steps, sim_concepts, sim_exercises,
                          sim_edges, sim_chain);
    }
    if (ingest->parsed()) return cmd_ingest(flags, in_path, ingest_out);
    if (graph->parsed()) return cmd_build_graph(flags, graph_in, graph_out);
    if (train_cmd->parsed()) return cmd_train(flags, train_data, train_out, train_p);
    if (eval_cmd->parsed()) return cmd_eval(flags, eval_ckpt, eval_data, eval_out);
    if (cv_cmd->parsed()) return cmd_cross_validate(flags, cv_data, cv_out, cv_grid);
    if (gc_cmd->parsed()) return cmd_gradcheck(flags, gc_out);
    if (ex_cmd->parsed()) return cmd_export_states(flags, ex_ckpt, ex_data, ex_out, ex_max);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << app.help() << "\n";
  return 2;
}
