#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "cspkit/pipeline.hpp"
#include "testutil.hpp"

using namespace cspkit;

namespace {

nlohmann::json ug_config() {
  return nlohmann::json{
      {"pipeline", "ug-2csp"},
      {"generator", {{"nA", 4}, {"nB", 4}, {"d1", 2}, {"d2", 2}, {"R_left", 2},
                     {"R_right", 2}, {"noise", 0.0}}},
      {"d", 2},
      {"epsilon", 0.1},
      {"seed", 11},
      {"override_lambda", 0.05},
  };
}

nlohmann::json clawfree_config() {
  return nlohmann::json{
      {"pipeline", "np-clawfree"},
      {"generator", {{"nA", 2}, {"nB", 2}, {"d1", 1}, {"d2", 1}, {"R_left", 2},
                     {"R_right", 2}, {"noise", 0.0}}},
      {"k", 6},
      {"epsilon", 0.01},
      {"seed", 5},
      {"override_lambda", 0.05},
      {"override_p", 1.0},
  };
}

}  // namespace

TEST_CASE("copy_expand_assignment lifts values exactly") {
  for (std::uint64_t seed : {3ULL, 4ULL}) {
    auto planted = gen_planted(2, 2, 2, 2, 2, 2, 0.3, seed);
    auto expanded = copy_expand(planted.inst, 2, 3);
    auto lifted = copy_expand_assignment(planted.inst, 2, 3, planted.planted);
    CHECK(eval_assignment(expanded, lifted) ==
          Catch::Approx(eval_assignment(planted.inst, planted.planted)));
  }
}

TEST_CASE("config parsing validates its schema") {
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"pipeline", "ug-2csp"}}),
                  ValidationError);
  auto c = config_from_json(ug_config());
  CHECK(c.pipeline == "ug-2csp");
  CHECK(c.d == 2);
  CHECK(c.override_lambda == 0.05);
  CHECK_FALSE(c.override_p.has_value());
  CHECK_THROWS_AS(run_pipeline(PipelineConfig{"nope", {}, {}, 1, 1, 0.1, 0}),
                  ParameterError);
}

TEST_CASE("ug-2csp pipeline: ledger, degree bounds, completeness") {
  auto rep = run_pipeline(config_from_json(ug_config()));
  CHECK(rep["degree_bound_ok"].get<bool>());
  CHECK(rep["params"]["mode"] == "desk-scale");
  CHECK(rep["params"]["lambda"] == Catch::Approx(0.05));
  CHECK(rep["params"]["lambda_overridden"].get<bool>());
  CHECK(rep["report"].contains("event_E1"));
  CHECK(rep["report"].contains("event_E2"));
  CHECK(rep["planted_val_expanded"] == Catch::Approx(1.0));
  // noise-0 planted instances stay fully satisfied by the lifted assignment
  if (!rep["planted_val_output"].is_null())
    CHECK(rep["planted_val_output"].get<double>() == Catch::Approx(1.0));
}

TEST_CASE("ug-2csp pipeline with p forced to 1 preserves val exactly") {
  // d1 = d2 = 1 so the expansion's degrees equal the bound d and p = 1
  // triggers no trimming at all
  auto cfg = ug_config();
  cfg["generator"]["d1"] = 1;
  cfg["generator"]["d2"] = 1;
  cfg["override_p"] = 1.0;
  auto rep = run_pipeline(config_from_json(cfg));
  CHECK(rep["planted_val_output"].get<double>() == Catch::Approx(1.0));
  CHECK(rep["report"]["event_E3"].get<bool>());
  CHECK(rep["report"]["removed_for_degree"].get<long long>() == 0);
  CHECK(rep["expanded_hash"] == rep["output_hash"]);
}

TEST_CASE("np-clawfree pipeline: balanced degrees and FGLSS checks") {
  auto rep = run_pipeline(config_from_json(clawfree_config()));
  CHECK(rep["dA"].get<int>() == 3);
  CHECK(rep["dB"].get<int>() == 2);
  CHECK(rep["dA_plus_dB_le_k"].get<bool>());
  CHECK(rep["degree_bound_ok"].get<bool>());
  REQUIRE(!rep["fglss"].is_null());
  CHECK(rep["fglss"]["claw_free_at_k"].get<bool>());
  CHECK(rep["fglss"]["indep_equals_val_times_edges"].get<bool>());
}

TEST_CASE("pipelines are byte-deterministic given config and seed") {
  for (const auto& cfg : {ug_config(), clawfree_config()}) {
    auto a = run_pipeline(config_from_json(cfg)).dump();
    auto b = run_pipeline(config_from_json(cfg)).dump();
    CHECK(a == b);
  }
}

TEST_CASE("sweep over an empty grid succeeds with empty output") {
  nlohmann::json cfg;
  cfg["cells"] = nlohmann::json::array();
  cfg["seeds"] = {1, 2, 3};
  auto summary = experiment_sweep(cfg);
  CHECK(summary.rows.empty());
  CHECK(summary.cells.empty());
  CHECK(sweep_rows_csv(summary.rows) ==
        "cell,seed,status,event_E1,event_E2,event_E3,degree_bound_ok\n");
}

TEST_CASE("sweep produces one row per cell x seed, reproducibly") {
  nlohmann::json cfg;
  cfg["cells"] = {ug_config(), clawfree_config()};
  cfg["seeds"] = {100, 200, 300};
  auto a = experiment_sweep(cfg);
  CHECK(a.rows.size() == 6);
  CHECK(a.cells.size() == 2);
  for (const auto& cell : a.cells) {
    CHECK(cell["ok_runs"].get<int>() == 3);
    const double rate = cell["completeness_rate"].get<double>();
    CHECK(rate >= 0.0);
    CHECK(rate <= 1.0);
  }
  auto b = experiment_sweep(cfg);
  CHECK(a.rows.dump() == b.rows.dump());
  CHECK(a.cells.dump() == b.cells.dump());
  // CSV shape: header + one line per row
  auto csv = sweep_rows_csv(a.rows);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
}

TEST_CASE("sweep records failures per row without aborting") {
  auto bad = ug_config();
  bad["epsilon"] = 0.9;  // out of range for ug-2csp
  nlohmann::json cfg;
  cfg["cells"] = {bad, ug_config()};
  cfg["seeds"] = {1};
  auto summary = experiment_sweep(cfg);
  REQUIRE(summary.rows.size() == 2);
  CHECK(summary.rows[0]["status"].get<std::string>().rfind("error", 0) == 0);
  CHECK(summary.rows[1]["status"] == "ok");
  CHECK(summary.cells[0]["ok_runs"].get<int>() == 0);
}
