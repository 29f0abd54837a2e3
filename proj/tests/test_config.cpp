#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "cpf/error.h"
#include "cpf/run_config.h"

using namespace cpf;
using nlohmann::json;

TEST_CASE("run config: unknown keys are rejected at every level") {
  CHECK_THROWS_AS(run_config_from_json(json{{"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json{{"model", json{{"dee", 8}}}}), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json{{"train", json{{"learning_rate", 0.1}}}}),
                  ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json{{"data", json{{"windows", 5}}}}), ConfigError);
  CHECK_THROWS_AS(
      run_config_from_json(json{{"data", json{{"column_mapping", json{{"user", "u"}}}}}}),
      ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json{{"simulate", json{{"n_students", 5}}}}),
                  ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json{{"gradcheck", json{{"step", 1e-5}}}}), ConfigError);
}

TEST_CASE("run config: partial documents override only what they name") {
  const json j{{"model", json{{"d", 32}, {"ablation", "FP"}}},
               {"train", json{{"lr", 0.01}}}};
  const RunConfig c = run_config_from_json(j);
  CHECK(c.model.d == 32);
  CHECK(c.model.ablation == Ablation::kNoForgetting);
  CHECK(c.model.d_a == 50);          // untouched default
  CHECK(c.train.lr == 0.01);
  CHECK(c.train.batch_size == 128);  // untouched default
  CHECK(c.window == 100);
}

TEST_CASE("run config: serialization round-trips") {
  RunConfig c;
  c.model.d = 24;
  c.model.review_mode = ReviewMode::kLiteral;
  c.model.ablation = Ablation::kNoLearningModule;
  c.model.mode = ModelMode::kLpkt;
  c.train.seed = 99;
  c.world.chain = true;
  c.world.base_forget_rate = 0.77;
  c.columns.skill = "skill_name";
  c.window = 500;
  c.gradcheck_windows = 2;

  const RunConfig back = run_config_from_json(run_config_to_json(c));
  CHECK(back.model.d == 24);
  CHECK(back.model.review_mode == ReviewMode::kLiteral);
  CHECK(back.model.ablation == Ablation::kNoLearningModule);
  CHECK(back.model.mode == ModelMode::kLpkt);
  CHECK(back.train.seed == 99);
  CHECK(back.world.chain);
  CHECK(back.world.base_forget_rate == 0.77);
  CHECK(back.columns.skill == "skill_name");
  CHECK(back.window == 500);
  CHECK(back.gradcheck_windows == 2);
}

TEST_CASE("run config: invalid enum values name the offender") {
  try {
    run_config_from_json(json{{"model", json{{"ablation", "XY"}}}});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("XY") != std::string::npos);
  }
}

TEST_CASE("run config: file loading and resolved-config emission") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "cpf_cfg_test";
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "cfg.json");
    out << R"({"model": {"d": 12}, "train": {"epochs": 3}})";
  }
  const RunConfig c = load_run_config((dir / "cfg.json").string());
  CHECK(c.model.d == 12);
  CHECK(c.train.epochs == 3);

  write_resolved_config(c, (dir / "out").string());
  std::ifstream in(dir / "out" / "resolved_config.json");
  REQUIRE(in.good());
  json j;
  in >> j;
  CHECK(j["model"]["d"] == 12);
  CHECK(j["train"]["epochs"] == 3);
  CHECK(j.contains("simulate"));

  {
    std::ofstream out(dir / "broken.json");
    out << "{not json";
  }
  CHECK_THROWS_AS(load_run_config((dir / "broken.json").string()), ConfigError);
  CHECK_THROWS_AS(load_run_config((dir / "missing.json").string()), ConfigError);
  fs::remove_all(dir);
}
