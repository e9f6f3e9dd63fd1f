#include "doctest.h"

#include <cmath>
#include <functional>
#include <random>

#include "common/errors.hpp"
#include "milp/model.hpp"
#include "milp/simplex.hpp"
#include "milp/solver.hpp"
#include "oracle/dense_lp.hpp"

using namespace topoctl;
using namespace topoctl::milp;

namespace {

oracle::Lp to_oracle(const Model& m) {
  oracle::Lp lp;
  for (std::size_t j = 0; j < m.num_variables(); ++j)
    lp.add_var(m.variables()[j].lower, m.variables()[j].upper, m.linear()[j]);
  for (const auto& c : m.constraints()) {
    std::vector<std::pair<int, double>> t;
    for (const auto& term : c.terms) t.push_back({term.var, term.coef});
    lp.add_row(t, c.sense == Sense::LessEqual ? '<' : c.sense == Sense::GreaterEqual ? '>' : '=', c.rhs);
  }
  return lp;
}

// Random model whose feasible set contains a known point x0.
Model random_model(std::mt19937& rng, int n, int m, int integers) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 2);
  Model model;
  std::vector<double> x0(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const bool integer = j < integers;
    const double lo = integer ? 0.0 : -2.0 - 3.0 * std::abs(u(rng));
    const double hi = integer ? 3.0 : 2.0 + 3.0 * std::abs(u(rng));
    x0[static_cast<std::size_t>(j)] = integer ? std::round(1.5 + 1.5 * u(rng)) : 0.5 * u(rng);
    model.add_variable("x" + std::to_string(j), lo, hi, integer, 3.0 * u(rng));
  }
  for (int i = 0; i < m; ++i) {
    std::vector<Term> t;
    double act = 0.0;
    for (int j = 0; j < n; ++j) {
      if (std::abs(u(rng)) < 0.4) continue;
      const double a = std::round(10.0 * u(rng)) / 2.0;
      t.push_back({j, a});
      act += a * x0[static_cast<std::size_t>(j)];
    }
    if (t.empty()) continue;
    const int kind = pick(rng);
    if (kind == 0) model.add_constraint("r" + std::to_string(i), t, Sense::LessEqual, act + std::abs(u(rng)));
    if (kind == 1) model.add_constraint("r" + std::to_string(i), t, Sense::GreaterEqual, act - std::abs(u(rng)));
    if (kind == 2 && i % 3 == 0) model.add_constraint("r" + std::to_string(i), t, Sense::Equal, act);
  }
  return model;
}

// Enumerates every integer assignment and solves the remaining LP.
double enumerate_milp(const Model& model) {
  std::vector<int> ints;
  for (std::size_t j = 0; j < model.num_variables(); ++j)
    if (model.variables()[j].integer) ints.push_back(static_cast<int>(j));
  double best = oracle::kInf;
  oracle::Lp base = to_oracle(model);
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == ints.size()) {
      const auto r = oracle::solve(base);
      if (r.status == oracle::LpStatus::Optimal) best = std::min(best, r.objective);
      return;
    }
    const auto j = static_cast<std::size_t>(ints[k]);
    const auto& v = model.variables()[j];
    for (double val = std::ceil(v.lower); val <= v.upper; val += 1.0) {
      base.lower[j] = base.upper[j] = val;
      rec(k + 1);
    }
  };
  rec(0);
  return best;
}

}  // namespace

TEST_CASE("model bookkeeping") {
  Model m;
  const int x = m.add_variable("x", 0, 4, false, 1.0);
  const int y = m.add_binary("y", 2.0);
  CHECK_THROWS_AS(m.add_constraint("bad", {{7, 1.0}}, Sense::LessEqual, 1), ArgumentError);
  m.add_constraint("c", {{x, 1.0}, {y, 1.0}, {x, 1.0}}, Sense::LessEqual, 3);
  REQUIRE(m.constraints()[0].terms.size() == 2);
  CHECK(m.constraints()[0].terms[0].coef == 2.0);
  CHECK_THROWS_AS(m.add_quadratic(x, -1.0), ArgumentError);
  m.add_quadratic(x, 0.5);
  m.add_constant(3.0);
  CHECK(m.num_integers() == 1);
  CHECK(m.has_quadratic());
  CHECK(m.objective_value({2.0, 1.0}) == doctest::Approx(2.0 + 2.0 + 0.5 * 4 + 3.0));
  CHECK(verify_solution(m, {1.0, 1.0}) <= 0.0);
  CHECK(verify_solution(m, {2.0, 1.0}) == doctest::Approx(2.0));
  CHECK(verify_solution(m, {5.0, 0.0}) > 0.0);
  CHECK_THROWS_AS(verify_solution(m, {1.0}), ArgumentError);
  CHECK(integrality_violation(m, {0.0, 0.3}) == doctest::Approx(0.3));
  CHECK(lp_relaxation(m).num_integers() == 0);

  const std::string lp = to_lp_format(m);
  for (const char* s : {"Minimize", "Subject To", "Bounds", "End", " c:", "x"}) CHECK(lp.find(s) != std::string::npos);
}

TEST_CASE("simplex matches the reference LP on random instances") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const Model m = random_model(rng, 6 + trial % 7, 5 + trial % 9, 0);
    const auto ref = oracle::solve(to_oracle(m));
    REQUIRE(ref.status == oracle::LpStatus::Optimal);
    const Solution s = solve(m);
    REQUIRE(s.optimal());
    CHECK(s.objective == doctest::Approx(ref.objective).epsilon(1e-7));
    CHECK(verify_solution(m, s.values) <= 1e-7);
  }
}

TEST_CASE("infeasible and unbounded models") {
  Model inf;
  const int x = inf.add_variable("x", 0, 10);
  inf.add_constraint("a", {{x, 1.0}}, Sense::GreaterEqual, 5);
  inf.add_constraint("b", {{x, 1.0}}, Sense::LessEqual, 4);
  CHECK(solve(inf).status == SolveStatus::Infeasible);

  Model unb;
  const int y = unb.add_variable("y", 0, kInf, false, -1.0);
  const int z = unb.add_variable("z", -kInf, kInf);
  unb.add_constraint("a", {{y, 1.0}, {z, -1.0}}, Sense::LessEqual, 1);
  CHECK(solve(unb).status == SolveStatus::Unbounded);

  Model iinf;
  const int w = iinf.add_variable("w", 0, 10, true);
  iinf.add_constraint("a", {{w, 2.0}}, Sense::Equal, 3);
  CHECK(solve(iinf).status == SolveStatus::Infeasible);
}

TEST_CASE("branch-and-bound matches enumeration") {
  std::mt19937 rng(5);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const Model m = random_model(rng, 7, 6, 4);
    const double ref = enumerate_milp(m);
    REQUIRE(std::isfinite(ref));
    const Solution s = solve(m);
    REQUIRE(s.optimal());
    CHECK(s.objective == doctest::Approx(ref).epsilon(1e-6));
    CHECK(integrality_violation(m, s.values) <= 1e-6);
    CHECK(verify_solution(m, s.values) <= 1e-7);
    CHECK(s.best_bound <= s.objective + 1e-6);
    ++checked;
  }
  CHECK(checked == 40);
}

TEST_CASE("node limit reports an incumbent without claiming optimality") {
  // knapsack with many equivalent items keeps the tree wide
  Model m;
  std::vector<Term> row;
  for (int j = 0; j < 30; ++j) row.push_back({m.add_binary("b" + std::to_string(j), -(10.0 + j % 3)), 3.0 + j % 2});
  m.add_constraint("cap", row, Sense::LessEqual, 40.5);
  SolverConfig cfg;
  cfg.node_limit = 3;
  const Solution s = solve(m, cfg);
  CHECK(s.status == SolveStatus::IterationLimit);
  if (!s.values.empty()) CHECK(verify_solution(m, s.values) <= 1e-9);
}

TEST_CASE("separable quadratics reach the analytic optimum") {
  // min sum_j q_j (x_j - a_j)^2  s.t. sum_j x_j = 1: x_j = a_j - mu / (2 q_j)
  const std::vector<double> q{0.5, 2.0, 1.0, 4.0}, a{0.3, -0.2, 0.9, 0.1};
  Model m;
  std::vector<Term> row;
  double constant = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    const int x = m.add_variable("x" + std::to_string(j), -5, 5, false, -2.0 * q[j] * a[j]);
    m.add_quadratic(x, q[j]);
    constant += q[j] * a[j] * a[j];
    row.push_back({x, 1.0});
  }
  m.add_constant(constant);
  m.add_constraint("sum", row, Sense::Equal, 1.0);
  double inv = 0.0, sa = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    inv += 1.0 / (2.0 * q[j]);
    sa += a[j];
  }
  const double mu = (sa - 1.0) / inv;
  double expect = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) expect += mu * mu / (4.0 * q[j]);

  const Solution s = solve(m);
  REQUIRE(s.optimal());
  CHECK(s.objective == doctest::Approx(expect).epsilon(1e-5));
  for (std::size_t j = 0; j < q.size(); ++j)
    CHECK(s.values[j] == doctest::Approx(a[j] - mu / (2.0 * q[j])).epsilon(1e-3));
}

TEST_CASE("quadratic with binaries") {
  // min (x - 0.7)^2 + 0.3 y  s.t. x <= y, x in [0, 1], y binary  ->  y = 1, x = 0.7
  Model m;
  const int x = m.add_variable("x", 0, 1, false, -1.4);
  const int y = m.add_binary("y", 0.3);
  m.add_quadratic(x, 1.0);
  m.add_constant(0.49);
  m.add_constraint("link", {{x, 1.0}, {y, -1.0}}, Sense::LessEqual, 0.0);
  const Solution s = solve(m);
  REQUIRE(s.optimal());
  CHECK(s.values[1] == doctest::Approx(1.0));
  CHECK(s.values[0] == doctest::Approx(0.7).epsilon(1e-4));
  CHECK(s.objective == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(s.objective == doctest::Approx(m.objective_value(s.values)));
}

TEST_CASE("dense simplex keeps bounds and rows after edits") {
  DenseSimplex lp(2);
  lp.set_cost(0, -1.0);
  lp.set_cost(1, -1.0);
  lp.set_bounds(0, 0.0, 3.0);
  lp.set_bounds(1, 0.0, 3.0);
  lp.add_row({{0, 1.0}, {1, 2.0}}, -kInf, 4.0);
  REQUIRE(lp.solve() == LpStatus::Optimal);
  CHECK(lp.objective() == doctest::Approx(-3.5));
  lp.set_bounds(0, 0.0, 1.0);
  REQUIRE(lp.solve() == LpStatus::Optimal);
  CHECK(lp.objective() == doctest::Approx(-2.5));
  lp.add_row({{0, 1.0}, {1, -1.0}}, 0.5, kInf);
  REQUIRE(lp.solve() == LpStatus::Optimal);
  CHECK(lp.value(0) - lp.value(1) >= 0.5 - 1e-9);
  CHECK(lp.objective() == doctest::Approx(-1.5));
}
