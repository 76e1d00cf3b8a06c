#include <doctest.h>

#include <cstdlib>

#include "algoforge/config.hpp"

using namespace algoforge;

TEST_CASE("full config document parses") {
  const std::string text = R"({
    "problem": {
      "kind": "root_finding",
      "name": "demo",
      "exprs": ["x^2-3"],
      "box_lo": [-4],
      "box_hi": [4],
      "initial_points": [[0.1]],
      "epsilon": 0.01,
      "it_max": 5
    },
    "family": {"kind": "two-step", "j_max": 2, "k_min": -1, "k_max": 1, "beta_grid": [0, 0.5]},
    "search": {"node_budget": 1000, "monotone_residual": true, "enforce_box": false,
               "abar_max": 4, "cost_mode": "residual-weighted"},
    "cost": {"exponent_cost": {"0": 0, "1": 2}, "order_weight": {"0": 1, "1": 5, "2": 50}},
    "starts": [[0.1], [0.2]],
    "shortlist": 3,
    "workers": 2,
    "output_dir": "out"
  })";
  const RunConfig cfg = parse_config_text(text);
  CHECK(cfg.has_problem);
  CHECK(cfg.problem.kind == ProblemKind::RootFinding);
  CHECK(cfg.problem.name == "demo");
  CHECK(cfg.problem.epsilon == 0.01);
  CHECK(cfg.problem.it_max == 5);
  CHECK(cfg.family.kind == AlgorithmKind::TwoStep);
  CHECK(cfg.family.beta_grid == std::vector<double>{0.0, 0.5});
  CHECK(cfg.search.node_budget == 1000);
  CHECK(cfg.search.monotone_residual);
  CHECK_FALSE(cfg.search.enforce_box);
  CHECK(cfg.search.abar_max == 4);
  CHECK(cfg.search.cost_mode == CostMode::ResidualWeighted);
  CHECK(cfg.cost.exponent_cost.at(1) == 2.0);
  CHECK(cfg.cost.order_weight.at(1) == 5.0);
  CHECK(cfg.starts.size() == 2);
  CHECK(cfg.shortlist == 3);
  CHECK(cfg.workers == 2);
  CHECK(cfg.output_dir == "out");
}

TEST_CASE("preset problems by name") {
  const RunConfig cfg = parse_config_text(R"({"problem": "quad_2d"})");
  CHECK(cfg.problem.name == "quad_2d");
  CHECK(cfg.problem.n == 2);
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK_THROWS_WITH_AS(parse_config_text(R"({"problme": "quad_2d"})"),
                       "unknown key 'problme' in config", ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"problem": {"kind": "minimization", "foo": 1}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"family": {"betas": []}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"search": {"budget": 5}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"cost": {"weights": {}}})"), ConfigError);
}

TEST_CASE("malformed documents raise config errors") {
  CHECK_THROWS_AS(parse_config_text("{ not json"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[1,2,3]"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"problem": "no_such"})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"problem": {"kind": "minimization",
    "exprs": ["x^2"], "box_lo": [-1], "box_hi": [1], "initial_points": [[5]]}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"shortlist": 0})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"family": {"beta_grid": [1.0]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"cost": {"exponent_cost": {"x": 1}}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"cost": {"exponent_cost": {"0": 1}}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"search": {"node_budget": 0}})"), ConfigError);
}

TEST_CASE("overrides apply on top of the config") {
  ConfigOverrides o;
  o.problem = "quartic_min";
  o.epsilon = 0.05;
  o.it_max = 7;
  o.family_kind = "two-step";
  o.beta_grid = "0,0.25";
  o.node_budget = 12345;
  o.no_box = true;
  o.cost_mode = "residual-weighted";
  o.workers = 2;
  o.output_dir = "results";
  o.starts = "0.1;-0.25";
  o.shortlist = 5;
  const RunConfig cfg = build_config(std::nullopt, o);
  CHECK(cfg.problem.name == "quartic_min");
  CHECK(cfg.problem.epsilon == 0.05);
  CHECK(cfg.problem.it_max == 7);
  CHECK(cfg.family.kind == AlgorithmKind::TwoStep);
  CHECK(cfg.family.beta_grid == std::vector<double>{0.0, 0.25});
  CHECK(cfg.search.node_budget == 12345);
  CHECK_FALSE(cfg.search.enforce_box);
  CHECK(cfg.search.cost_mode == CostMode::ResidualWeighted);
  CHECK(cfg.workers == 2);
  CHECK(cfg.output_dir == "results");
  CHECK(cfg.starts == std::vector<std::vector<double>>{{0.1}, {-0.25}});
  CHECK(cfg.shortlist == 5);

  ConfigOverrides bad = o;
  bad.epsilon = -1.0;
  CHECK_THROWS_AS(build_config(std::nullopt, bad), ConfigError);

  ConfigOverrides bad_starts;
  bad_starts.problem = "quartic_min";
  bad_starts.starts = "0.1;zz";
  CHECK_THROWS_AS(build_config(std::nullopt, bad_starts), ConfigError);
}

TEST_CASE("ALGOFORGE_OUT provides the default output directory") {
  setenv("ALGOFORGE_OUT", "/tmp/af_env_out", 1);
  ConfigOverrides o;
  o.problem = "quartic_min";
  RunConfig cfg = build_config(std::nullopt, o);
  CHECK(cfg.output_dir == "/tmp/af_env_out");

  o.output_dir = "explicit";
  cfg = build_config(std::nullopt, o);
  CHECK(cfg.output_dir == "explicit");
  unsetenv("ALGOFORGE_OUT");

  cfg = build_config(std::nullopt, o);
  CHECK(cfg.output_dir == "explicit");
}

TEST_CASE("effective config echo is stable under a json round trip") {
  ConfigOverrides o;
  o.problem = "quad_2d";
  o.family_kind = "two-step";
  const RunConfig cfg = build_config(std::nullopt, o);
  const std::string echo = effective_config_json(cfg);
  CHECK(echo.find("\"quad_2d\"") != std::string::npos);
  CHECK(echo.find("two-step") != std::string::npos);
  // workers and output_dir are execution details, not semantics
  CHECK(echo.find("workers") == std::string::npos);
  CHECK(echo.find("output_dir") == std::string::npos);
  const RunConfig again = build_config(std::nullopt, o);
  CHECK(effective_config_json(again) == echo);
}
