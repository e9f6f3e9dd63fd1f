#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "milp/model.hpp"
#include "milp/simplex.hpp"

namespace topoctl::milp {

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit, NumericalError };

std::string to_string(SolveStatus status);

struct SolveStats {
  std::int64_t nodes = 0;
  std::int64_t lp_iterations = 0;
  double seconds = 0.0;
};

struct Solution {
  SolveStatus status = SolveStatus::NumericalError;
  std::vector<double> values;  // empty unless an incumbent exists
  double objective = 0.0;      // exact objective of `values`, quadratic terms included
  double best_bound = 0.0;
  SolveStats stats;

  bool optimal() const { return status == SolveStatus::Optimal; }
};

struct SolverConfig {
  double gap = 1e-6;            // relative MIP gap
  double absolute_gap = 1e-9;
  double integrality_tol = 1e-6;
  std::int64_t node_limit = 200'000;
  double time_limit = 0.0;      // seconds, 0 = none
  // Diagonal quadratic objective terms are replaced by an epigraph variable
  // bounded below by tangents at `quad_segments + 1` uniform points of the
  // variable's box. With `quad_refine`, further tangents are added at the LP
  // point until the under-estimate is within quad_resolution^2 * q.
  int quad_segments = 16;
  bool quad_refine = true;
  double quad_resolution = 1e-7;
  int quad_max_rounds = 60;
  std::size_t warm_start_memory = std::size_t{1} << 30;
  SimplexOptions lp;
};

// Narrow backend interface: load a model, solve, query the result.
class Backend {
public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  virtual Solution solve(const Model& model, const SolverConfig& config) const = 0;
};

// Reference backend: best-bound branch-and-bound over dense-simplex LP
// relaxations, branching on the most fractional variable (lowest index on ties).
class BranchAndBound final : public Backend {
public:
  std::string name() const override { return "bnb"; }
  Solution solve(const Model& model, const SolverConfig& config) const override;
};

// Solves with the reference backend. Reentrant: concurrent calls on distinct
// models share no state.
Solution solve(const Model& model, const SolverConfig& config = {});

}  // namespace topoctl::milp
