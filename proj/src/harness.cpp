#include "cpf/harness.h"

#include <algorithm>

#include "cpf/error.h"
#include "cpf/loss.h"
#include "cpf/synthetic.h"

namespace cpf {

CellFixture make_cell_fixture(const ModelConfig& base, int n_windows, int window_len,
                              uint64_t seed) {
  WorldSpec spec;
  spec.chain = true;
  spec.concepts = base.k_concepts;
  spec.exercises = base.n_exercises;
  spec.students = std::max(4, n_windows * 2);
  spec.base_forget_rate = 0.3;
  spec.gap_log_mean = 10.5;  // gaps around half a day so damping varies
  spec.seed = seed;

  DiscretizerSpec disc;
  disc.answer_time_cap_s = base.answer_time_vocab - 1;
  disc.interval_time_cap_min = base.interval_time_vocab - 1;
  disc.difficulty_buckets = base.difficulty_buckets;
  disc.accuracy_buckets = base.accuracy_buckets;

  for (int attempt = 0; attempt < 100; ++attempt, ++spec.seed) {
    const World world = generate_world(spec);
    Dataset ds = ingest_records(simulate_log(world, window_len * 3), disc, window_len);
    if (ds.meta.num_exercises() != base.n_exercises ||
        ds.meta.num_concepts() != base.k_concepts) {
      continue;  // some exercise or concept never occurred; try the next seed
    }
    const DifficultyTable difficulty = compute_exercise_difficulty(
        ds.windows, ds.meta.num_exercises(), disc.difficulty_buckets);
    apply_difficulty(ds.windows, difficulty);

    // translate the planted chain into the dataset's concept indexing
    std::vector<int> vocab_of(static_cast<size_t>(base.k_concepts), -1);
    for (int i = 0; i < ds.meta.num_concepts(); ++i) {
      const int true_idx = std::stoi(ds.meta.concepts[static_cast<size_t>(i)].substr(1));
      vocab_of[static_cast<size_t>(true_idx)] = i;
    }
    std::vector<std::pair<int, int>> edges;
    for (const auto& [a, b] : world.edges) {
      edges.emplace_back(vocab_of[static_cast<size_t>(a)], vocab_of[static_cast<size_t>(b)]);
    }

    CellFixture fixture;
    fixture.config = base;
    fixture.config.n_exercises = ds.meta.num_exercises();
    fixture.config.k_concepts = ds.meta.num_concepts();
    fixture.config.answer_time_vocab = disc.answer_vocab();
    fixture.config.interval_time_vocab = disc.interval_vocab();
    fixture.p = PMatrix::from_edges(base.k_concepts, edges);
    for (const StudentSequence& w : ds.windows) {
      if (static_cast<int>(fixture.windows.size()) >= n_windows) break;
      if (w.valid_count() >= 2) fixture.windows.push_back(w);
    }
    fixture.world_seed = spec.seed;
    fixture.dataset = std::move(ds);
    if (static_cast<int>(fixture.windows.size()) == n_windows) return fixture;
  }
  throw DataError("could not build a covering fixture for the requested dimensions");
}

GradCheckReport run_cell_gradcheck(const ModelConfig& base, double h, double tol, int n_windows,
                                   int window_len, uint64_t seed, double l2_lambda) {
  CellFixture fixture = make_cell_fixture(base, n_windows, window_len, seed);
  ModelConfig config = fixture.config;
  config.dropout = 0.0;  // the loss must be deterministic for differencing
  CpfModel model(config, fixture.dataset.meta.exercise_concept, fixture.p, seed + 1);

  long total_terms = 0;
  for (const auto& w : fixture.windows) total_terms += std::max(0, w.valid_count() - 1);
  std::vector<Parameter*> params = model.trainable();
  const std::vector<const Parameter*> cparams(params.begin(), params.end());

  auto loss_fn = [&]() {
    double sum = 0.0;
    for (const auto& w : fixture.windows) {
      Tape tape;
      const auto out = model.forward(tape, w);
      if (out.predictions.empty()) continue;
      sum += tape.val(tape.bce_sum(out.predictions, out.labels)).scalar_value();
    }
    return sum / static_cast<double>(total_terms) + l2_sum_squares(cparams, l2_lambda);
  };
  auto grad_fn = [&]() {
    model.params().zero_grads();
    for (const auto& w : fixture.windows) {
      Tape tape;
      const auto out = model.forward(tape, w);
      if (out.predictions.empty()) continue;
      tape.backward(tape.scale(tape.bce_sum(out.predictions, out.labels),
                               1.0 / static_cast<double>(total_terms)));
    }
    accumulate_l2_gradient(params, l2_lambda);
  };
  return finite_diff_check(loss_fn, grad_fn, params, h, tol);
}

}  // namespace cpf
