#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cpf/synthetic.h"

using namespace cpf;

TEST_CASE("world generation: empty, chain, determinism, capacity error") {
  WorldSpec none;
  none.concepts = 4;
  none.exercises = 8;
  none.dag_edges = 0;
  CHECK(generate_world(none).edges.empty());

  WorldSpec chain;
  chain.concepts = 7;
  chain.exercises = 7;
  chain.chain = true;
  const World w = generate_world(chain);
  REQUIRE(w.edges.size() == 6);
  for (int c = 0; c < 6; ++c) {
    CHECK(w.edges[static_cast<size_t>(c)].first == c);
    CHECK(w.edges[static_cast<size_t>(c)].second == c + 1);
  }

  WorldSpec rnd;
  rnd.concepts = 6;
  rnd.exercises = 12;
  rnd.dag_edges = 8;
  rnd.seed = 99;
  const World a = generate_world(rnd);
  const World b = generate_world(rnd);
  CHECK(a.edges == b.edges);
  CHECK(a.ability == b.ability);
  CHECK(a.exercise_difficulty == b.exercise_difficulty);

  WorldSpec too_many;
  too_many.concepts = 4;
  too_many.exercises = 4;
  too_many.dag_edges = 7;  // capacity is 6
  CHECK_THROWS_AS(generate_world(too_many), std::invalid_argument);
}

TEST_CASE("generated DAG is acyclic and every concept has an exercise") {
  WorldSpec spec;
  spec.concepts = 8;
  spec.exercises = 20;
  spec.dag_edges = 12;
  spec.seed = 5;
  const World w = generate_world(spec);
  // Kahn's algorithm
  std::vector<int> indeg(8, 0);
  for (auto& [i, j] : w.edges) indeg[static_cast<size_t>(j)]++;
  std::vector<int> queue;
  for (int c = 0; c < 8; ++c) {
    if (indeg[static_cast<size_t>(c)] == 0) queue.push_back(c);
  }
  int seen = 0;
  while (!queue.empty()) {
    const int c = queue.back();
    queue.pop_back();
    ++seen;
    for (int nxt : w.successors_of[static_cast<size_t>(c)]) {
      if (--indeg[static_cast<size_t>(nxt)] == 0) queue.push_back(nxt);
    }
  }
  CHECK(seen == 8);
  for (int c = 0; c < 8; ++c) CHECK_FALSE(w.concept_exercises[static_cast<size_t>(c)].empty());
}

TEST_CASE("mastery dynamics: monotone under no forgetting, bounded always") {
  WorldSpec spec;
  spec.concepts = 3;
  spec.exercises = 3;
  spec.students = 1;
  spec.dag_edges = 0;
  spec.ability_min = spec.ability_max = 1.0;
  spec.learn_rate = 1.0;
  spec.base_forget_rate = 0.0;
  const World w = generate_world(spec);
  StudentSim sim(w, 0);
  Rng rng(1);
  double prev = 0.0;
  for (int i = 0; i < 10; ++i) {
    sim.attempt(0, rng);
    sim.elapse_days(2.0);
    CHECK(sim.mastery(0) >= prev);
    prev = sim.mastery(0);
  }
  CHECK(sim.mastery(0) == doctest::Approx(1.0));

  // decay keeps mastery in [0,1] and is monotone in elapsed time
  WorldSpec decay = spec;
  decay.base_forget_rate = 0.5;
  decay.prerequisite_forget_coupling = 0.3;
  decay.chain = true;
  const World dw = generate_world(decay);
  StudentSim sd(dw, 0);
  sd.attempt(0, rng);
  sd.attempt(1, rng);
  double last = sd.mastery(1);
  for (int i = 0; i < 20; ++i) {
    sd.elapse_days(0.5);
    for (int c = 0; c < 3; ++c) {
      CHECK(sd.mastery(c) >= 0.0);
      CHECK(sd.mastery(c) <= 1.0);
    }
    CHECK(sd.mastery(1) <= last + 1e-12);
    last = sd.mastery(1);
  }
}

TEST_CASE("zero ability: long-run correctness approaches sigmoid(-scale * difficulty)") {
  WorldSpec spec;
  spec.concepts = 1;
  spec.exercises = 1;
  spec.students = 1;
  spec.dag_edges = 0;
  spec.ability_min = spec.ability_max = 0.0;
  spec.difficulty_min = spec.difficulty_max = 0.6;
  spec.correctness_scale = 5.0;
  const World w = generate_world(spec);
  StudentSim sim(w, 0);
  Rng rng(42);
  long correct = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) correct += sim.attempt(0, rng);
  const double expected = 1.0 / (1.0 + std::exp(5.0 * 0.6));
  CHECK(static_cast<double>(correct) / n == doctest::Approx(expected).epsilon(0.08));
}

TEST_CASE("higher ability yields strictly higher final mastery on a fixed schedule") {
  WorldSpec spec;
  spec.concepts = 4;
  spec.exercises = 8;
  spec.students = 2;
  spec.dag_edges = 3;
  spec.seed = 11;
  spec.ability_min = 0.2;
  spec.ability_max = 0.2;
  World w = generate_world(spec);
  w.ability = {0.2, 0.9};

  auto run = [&](int student) {
    StudentSim sim(w, student);
    Rng rng(7);
    for (int i = 0; i < 40; ++i) {
      sim.attempt(i % spec.exercises, rng);  // same exercise schedule
      sim.elapse_days(0.3);
    }
    return sim.mean_mastery();
  };
  CHECK(run(1) > run(0));
}

TEST_CASE("no coupling: successor decay is untouched by prerequisite loss") {
  WorldSpec spec;
  spec.concepts = 2;
  spec.exercises = 2;
  spec.students = 1;
  spec.chain = true;
  spec.base_forget_rate = 0.4;
  spec.prerequisite_forget_coupling = 0.0;
  const World w = generate_world(spec);

  // mastery of concept 1 after decay must equal the closed-form exponential
  StudentSim sim(w, 0);
  Rng rng(3);
  sim.attempt(0, rng);
  sim.attempt(1, rng);
  const double before = sim.mastery(1);
  sim.elapse_days(2.0);
  CHECK(sim.mastery(1) == doctest::Approx(before * std::exp(-0.4 * 2.0)).epsilon(1e-12));

  WorldSpec coupled = spec;
  coupled.prerequisite_forget_coupling = 0.5;
  const World wc = generate_world(coupled);
  StudentSim sc(wc, 0);
  sc.attempt(0, rng);
  sc.attempt(1, rng);
  const double b2 = sc.mastery(1);
  sc.elapse_days(2.0);
  CHECK(sc.mastery(1) < b2 * std::exp(-0.4 * 2.0));  // extra drag from the prerequisite
}

TEST_CASE("simulate_log is deterministic and sorted") {
  WorldSpec spec;
  spec.concepts = 5;
  spec.exercises = 10;
  spec.students = 8;
  spec.dag_edges = 4;
  spec.seed = 123;
  const World w = generate_world(spec);
  const auto a = simulate_log(w, 25);
  const auto b = simulate_log(w, 25);
  REQUIRE(a.size() == b.size());
  REQUIRE(a.size() == 8u * 25u);
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].student == b[i].student);
    CHECK(a[i].timestamp_s == b[i].timestamp_s);
    CHECK(a[i].correct == b[i].correct);
  }
  for (size_t i = 1; i < a.size(); ++i) {
    if (a[i].student == a[i - 1].student) CHECK(a[i].timestamp_s >= a[i - 1].timestamp_s);
  }
}

TEST_CASE("score_p_recovery handles the no-edge world") {
  Tensor t_tilde({3, 3});
  const PMatrix p = PMatrix::empty(3);
  const RecoveryScore s = score_p_recovery({}, t_tilde, p);
  CHECK_FALSE(s.edge_auc.has_value());
  CHECK_FALSE(s.precision.has_value());
}
