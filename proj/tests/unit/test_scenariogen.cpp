#include "doctest.h"
#include "fixtures.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <map>

#include "common/errors.hpp"
#include "scenariogen/scenarios.hpp"

using namespace topoctl;

TEST_CASE("risk CSV parsing") {
  const RiskMap r = load_risk("from_bus,to_bus,circuit,risk\n1,2,1,0.5\n\n2,3,1,0.25\r\n");
  CHECK(r.size() == 2);
  CHECK(r.risk({1, 2, 1}) == 0.5);
  CHECK(r.risk({2, 3, 1}) == 0.25);
  CHECK(r.risk({9, 9, 1}) == 0.0);
  CHECK_THROWS_AS(load_risk("1,2,1\n"), ParseError);
  CHECK_THROWS_AS(load_risk("1,2,1,abc\n"), ParseError);
  CHECK_THROWS_AS(load_risk("1,2,1,-0.1\n"), ValidationError);

  const Network net = fixtures::fivebus();
  CHECK_NOTHROW(fixtures::fivebus_risk().check_against(net));
  CHECK_THROWS_AS(load_risk("1,3,1,0.2\n").check_against(net), ValidationError);
}

TEST_CASE("sampler is reproducible and honours m and R") {
  const RiskMap risk = fixtures::fivebus_risk();
  const ScenarioSet a = generate(risk, 0.0, 50, 3, 7);
  const ScenarioSet b = generate(risk, 0.0, 50, 3, 7);
  const ScenarioSet c = generate(risk, 0.0, 50, 3, 8);
  CHECK(a.scenarios == b.scenarios);
  CHECK(scenario_hash(a) == scenario_hash(b));
  CHECK(scenario_hash(a) != scenario_hash(c));
  CHECK(a.size() == 50);
  for (std::size_t s = 0; s < a.size(); ++s) {
    const auto& out = a.scenarios[s].out_lines;
    CHECK(out.size() >= 1);
    CHECK(out.size() <= 3);
    CHECK(std::is_sorted(out.begin(), out.end()));
    CHECK(std::adjacent_find(out.begin(), out.end()) == out.end());
    CHECK(a.probabilities[s] == doctest::Approx(1.0 / 50));
  }

  // R = 0.2 keeps only lines with risk >= 0.2
  const ScenarioSet hi = generate(risk, 0.2, 100, 4, 1);
  for (const auto& sc : hi.scenarios)
    for (const auto& k : sc.out_lines) CHECK(risk.risk(k) >= 0.2);

  const ScenarioSet none = generate(risk, 0.31, 20, 4, 1);
  for (const auto& sc : none.scenarios) CHECK(sc.out_lines.empty());

  CHECK_THROWS_AS(generate(risk, 0.0, 0, 1, 1), ArgumentError);
  CHECK_THROWS_AS(generate(risk, 0.0, 5, 0, 1), ArgumentError);
}

TEST_CASE("single-draw marginals match normalized weights") {
  const RiskMap risk = fixtures::fivebus_risk();
  const int n = 10000;
  const ScenarioSet set = generate(risk, 0.0, n, 1, 2024);
  std::map<LineKey, int> seen;
  for (const auto& sc : set.scenarios) {
    REQUIRE(sc.out_lines.size() == 1);
    ++seen[sc.out_lines[0]];
  }
  double total = 0.0;
  for (const auto& [k, r] : risk.risks()) total += r;
  double chi2 = 0.0;
  for (const auto& [k, r] : risk.risks()) {
    const double expected = n * r / total;
    chi2 += (seen[k] - expected) * (seen[k] - expected) / expected;
  }
  const boost::math::chi_squared dist(static_cast<double>(risk.size() - 1));
  CHECK(chi2 < boost::math::quantile(dist, 0.99));
}

TEST_CASE("threshold grid search") {
  const RiskMap risk = fixtures::fivebus_risk();
  // risks 0.2 0.1 0.3 0.15 0.1 0.15
  CHECK(threshold_for_k_lines(risk, 2) == doctest::Approx(0.2));
  CHECK(threshold_for_k_lines(risk, 1) == doctest::Approx(0.3));
  CHECK(threshold_for_k_lines(risk, 6) == doctest::Approx(0.1));
  CHECK_THROWS_AS(threshold_for_k_lines(risk, 4), ArgumentError);
  CHECK_THROWS_AS(threshold_for_k_lines(risk, 7), ArgumentError);
}

TEST_CASE("concentration histogram") {
  const ScenarioSet set =
      ScenarioSet::from_outages({{{1, 2, 1}, {2, 3, 1}}, {{1, 2, 1}}, {{1, 2, 1}, {3, 4, 1}}, {}});
  const auto h = concentration_histogram(set);
  REQUIRE(h.size() == 4);
  CHECK(h[0] == 3);
  CHECK(h[1] == 1);
  CHECK(h[2] == 1);
  CHECK(h[3] == 0);
}

TEST_CASE("JSONL round trip") {
  const ScenarioSet set = generate(fixtures::fivebus_risk(), 0.0, 12, 3, 5);
  const std::string text = scenarios_to_jsonl(set);
  CHECK(text.find("[\"1\",\"2\",1]") != std::string::npos);
  const ScenarioSet back = scenarios_from_jsonl(text);
  CHECK(back.scenarios == set.scenarios);
  CHECK(back.probabilities == set.probabilities);
  CHECK(scenario_hash(back) == scenario_hash(set));

  const ScenarioSet numeric = scenarios_from_jsonl("{\"id\":4,\"out\":[[2,1,1],[1,2,1]]}\n");
  CHECK(numeric.scenarios[0].id == 4);
  CHECK(numeric.scenarios[0].out_lines.size() == 2);
  CHECK_THROWS_AS(scenarios_from_jsonl("{\"id\":0}\n"), ParseError);
  CHECK_THROWS_AS(scenarios_from_jsonl("{\"id\":0,\"out\":[[1,2]]}\n"), ParseError);
}
