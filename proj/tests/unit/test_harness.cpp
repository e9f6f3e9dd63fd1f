#include "doctest.h"
#include "fixtures.hpp"

#include <cmath>
#include <sstream>

#include "common/errors.hpp"
#include "harness/experiment.hpp"

using namespace topoctl;

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("experiment config parsing") {
  const ExperimentConfig def = experiment_config_from_json("{}");
  CHECK(def.counts().size() == 10);
  CHECK(def.counts().front() == 20);
  CHECK(def.counts().back() == 200);
  CHECK(def.scalings == std::vector<double>{1.0, 1.05});
  CHECK(def.budget == 5);

  const ExperimentConfig c = experiment_config_from_json(
      R"({"scenario_counts":[2,4],"seeds":[3],"formulations":["corrective"],"methods":["ph"],"threads":2,
          "ph":{"max_iterations":7,"gamma":1.5},"solver":{"gap":1e-4}})");
  CHECK(c.counts() == std::vector<int>{2, 4});
  CHECK(c.formulations == std::vector<Kind>{Kind::Corrective});
  CHECK(c.ph.max_iterations == 7);
  CHECK(c.ph.gamma == 1.5);
  CHECK(c.ph.threads == 2);
  CHECK(c.ph.solver.gap == 1e-4);

  CHECK_THROWS_AS(experiment_config_from_json("{\"scenario_count\":[2]}"), ArgumentError);
  CHECK_THROWS_AS(experiment_config_from_json("{\"ph\":{\"rho\":1}}"), ArgumentError);
  CHECK_THROWS_AS(experiment_config_from_json("{\"methods\":[\"benders\"]}"), ArgumentError);
  CHECK_THROWS_AS(experiment_config_from_json("{\"modes\":[\"gpu\"]}"), ArgumentError);
  CHECK_THROWS_AS(experiment_config_from_json("{\"budget\":\"five\"}"), ArgumentError);
  CHECK_THROWS_AS(experiment_config_from_json("[1,2"), ParseError);
}

TEST_CASE("solve options parsing") {
  const SolveOptions d = solve_options_from_json("");
  CHECK(d.kind == Kind::Preventive);
  CHECK(d.method == "extensive");
  const SolveOptions o = solve_options_from_json(
      R"({"formulation":"corrective","method":"ph","mode":"parallel","budget":2,"load_scaling":1.05})");
  CHECK(o.kind == Kind::Corrective);
  CHECK(o.mode == PhMode::Parallel);
  CHECK(o.budget == 2);
  CHECK(o.load_scaling == 1.05);
  CHECK_THROWS_AS(solve_options_from_json(R"({"formulation":"deterministic","method":"ph"})"), ArgumentError);
  CHECK_THROWS_AS(solve_options_from_json(R"({"load_scaling":0})"), ArgumentError);
  CHECK_THROWS_AS(solve_options_from_json(R"({"seed":1})"), ArgumentError);
}

TEST_CASE("experiment sweep rows") {
  const Network net = fixtures::fivebus();
  const RiskMap risk = fixtures::fivebus_risk();
  ExperimentConfig cfg;
  cfg.scenario_counts = {2, 3};
  cfg.scalings = {1.0, 1.05};
  cfg.seeds = {1};
  cfg.budget = 1;
  cfg.max_outages = 2;
  cfg.methods = {"extensive", "ph"};
  cfg.modes = {"serial", "parallel"};
  const auto rows = run_experiment(cfg, net, risk);
  // per (scaling, count): extensive serial + ph serial + ph parallel, two formulations each
  REQUIRE(rows.size() == 2 * 2 * 3 * 2);
  for (std::size_t i = 0; i < rows.size(); i += 2) {
    const ResultRow& p = rows[i];
    const ResultRow& c = rows[i + 1];
    REQUIRE(p.formulation == "preventive");
    REQUIRE(c.formulation == "corrective");
    CHECK(p.scenario_hash == c.scenario_hash);
    CHECK(p.status == "optimal");
    CHECK(c.status == "optimal");
    CHECK(c.relative_gap_vs_preventive == doctest::Approx((p.objective - c.objective) / p.objective));
    CHECK(p.max_residual <= 1e-6);
    CHECK(c.max_residual <= 1e-6);
  }
  // same cell, same scenario set, same objective across modes
  CHECK(rows[2].scenario_hash == rows[4].scenario_hash);
  CHECK(rows[2].objective == rows[4].objective);

  const auto lines = split_lines(rows_to_csv(rows));
  CHECK(lines.size() == rows.size() + 1);
  CHECK(lines[0] ==
        "formulation,method,mode,scenarios,scaling,threshold,seed,status,seconds,iterations,objective,"
        "expected_load_shed_mw,relative_gap_vs_preventive,scenario_hash");
  CHECK(lines[1].rfind("preventive,extensive,serial,2,1,0,1,optimal,", 0) == 0);
}

TEST_CASE("failed solves become rows, not exceptions") {
  // a generator floor above the demand makes every scenario infeasible
  std::vector<Bus> buses{{1, 0.0, 2.0, 3.0, 10.0, 1.0, 100.0, true}, {2, 1.0, 0.0, 0.0, 0.0, 0.0, 100.0, false}};
  const Network net(buses, {{1, 2, 1, -10.0, 0.0, 5.0, 0.5, true}}, 100.0);
  const RiskMap risk(std::map<LineKey, double>{{{1, 2, 1}, 0.5}});
  ExperimentConfig cfg;
  cfg.scenario_counts = {2};
  cfg.scalings = {1.0};
  cfg.methods = {"extensive", "ph"};
  cfg.modes = {"serial"};
  cfg.formulations = {Kind::Preventive};
  const auto rows = run_experiment(cfg, net, risk);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].status == "infeasible");
  CHECK(rows[1].status.rfind("error: ", 0) == 0);
  CHECK_FALSE(rows[1].has_values);
  const auto lines = split_lines(rows_to_csv(rows));
  CHECK(lines[2].find(",,,") != std::string::npos);
}

TEST_CASE("histogram emitters") {
  CHECK(histogram_csv({3, 1, 0}) == "k,lines\n1,3\n2,1\n3,0\n");
  const std::string svg = histogram_svg({3, 1, 0}, "demo");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(std::count(svg.begin(), svg.end(), '\n') > 3);
  CHECK(svg.find("<rect") != std::string::npos);
  CHECK(svg.find("demo") != std::string::npos);
}

TEST_CASE("confidence study summary") {
  CHECK(relative_gap(100.0, 90.0) == doctest::Approx(0.1));
  CHECK(relative_gap(0.0, 0.0) == 0.0);

  const Network net = default_costs(parse_case(fixtures::read(fixtures::data("sevenbus.m"))));
  const RiskMap risk = load_risk(fixtures::read(fixtures::data("sevenbus_risk.csv")));
  ConfidenceConfig cfg;
  cfg.scenarios = 4;
  cfg.seeds = {1, 2};
  cfg.budget = 2;
  cfg.method = "extensive";
  const ConfidenceSummary s = confidence_study(net, risk, cfg);
  REQUIRE(s.rows.size() == 4);
  CHECK(s.rows[0].arm == "dispersed");
  CHECK(s.rows[2].arm == "concentrated");
  CHECK(s.rows[2].threshold == doctest::Approx(0.4));
  double prev = 0.0, corr = 0.0;
  for (int i = 0; i < 2; ++i) {
    prev += s.rows[static_cast<std::size_t>(i)].preventive_shed_mw / 2.0;
    corr += s.rows[static_cast<std::size_t>(i)].corrective_shed_mw / 2.0;
  }
  CHECK(s.dispersed_preventive_mw == doctest::Approx(prev));
  CHECK(s.dispersed_gap == doctest::Approx(relative_gap(prev, corr)));
  CHECK(s.gap_shrinks == (s.concentrated_gap < s.dispersed_gap));
  for (const auto& r : s.rows) CHECK(r.corrective_objective <= r.preventive_objective + 1e-8);
  CHECK(split_lines(confidence_to_csv(s)).size() == 5);

  ConfidenceConfig bad = cfg;
  bad.concentrated_lines = 8;
  CHECK_THROWS_AS(confidence_study(net, risk, bad), ArgumentError);
}
