#pragma once

#include <cstdint>
#include <vector>

#include "milp/model.hpp"

namespace topoctl::milp {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit, Numerical };

struct SimplexOptions {
  double primal_tol = 1e-9;
  double dual_tol = 1e-9;
  double pivot_tol = 1e-9;
  std::int64_t max_iterations = 1'000'000;
  int degenerate_streak = 50;  // switch to Bland's rule after this many stalled pivots
};

// Bounded-variable primal simplex on a dense tableau.
//
// Every row i carries a logical variable s_i = a_i x with bounds [lo_i, hi_i],
// so the system is [A, -I] (x, s) = 0 and all variables are boxed (possibly
// with infinite sides). Phase one minimizes the sum of bound violations of the
// basic variables from any starting basis, which lets branch-and-bound reuse a
// parent's final tableau after tightening bounds. Rows are scaled by their
// largest coefficient and costs by their largest magnitude.
//
// The object is a plain value: copying it copies the whole factorized state.
class DenseSimplex {
public:
  DenseSimplex(int num_structural, SimplexOptions options = {});

  // `weight` > 1 tightens the row's effective feasibility tolerance by that
  // factor (used for tangent cuts, whose violations are tiny by construction).
  int add_row(const std::vector<Term>& terms, double lower, double upper, double weight = 1.0);
  void set_cost(int var, double cost);
  void set_bounds(int var, double lower, double upper);

  LpStatus solve();

  int num_structural() const { return n_; }
  int num_rows() const { return m_; }
  double lower(int var) const { return lb_[static_cast<std::size_t>(var)]; }
  double upper(int var) const { return ub_[static_cast<std::size_t>(var)]; }
  // Values of the structural variables.
  std::vector<double> primal() const;
  double value(int var) const { return x_[static_cast<std::size_t>(var)]; }
  double objective() const;
  std::int64_t iterations() const { return iterations_; }
  std::size_t memory_bytes() const;

private:
  struct SparseRow {
    std::vector<int> idx;
    std::vector<double> val;
  };

  int total() const { return n_ + m_; }
  bool is_basic(int j) const { return row_of_[static_cast<std::size_t>(j)] >= 0; }
  double reduced_cost_phase1(int j, const std::vector<int>& infeasible_rows, const std::vector<double>& sign) const;
  void compute_duals();
  void recompute_basics();
  void refactor();
  void pivot(int row, int col);
  double max_row_drift() const;
  double nonbasic_value(int j) const;

  SimplexOptions opt_;
  int n_ = 0;
  int m_ = 0;
  std::vector<std::vector<double>> tab_;  // m x (n + m), B^-1 [A, -I]
  std::vector<SparseRow> rows_;            // scaled original rows
  std::vector<double> row_scale_;
  std::vector<double> cost_;  // unscaled, length n + m (logicals 0)
  double cost_scale_ = 1.0;
  std::vector<double> lb_, ub_, x_;
  std::vector<int> basis_;   // basic variable of each row
  std::vector<int> row_of_;  // row of a basic variable, -1 if nonbasic
  std::vector<double> d_;    // phase-two reduced costs (scaled)
  bool duals_valid_ = false;
  std::int64_t iterations_ = 0;
  int since_refactor_ = 0;
};

}  // namespace topoctl::milp
