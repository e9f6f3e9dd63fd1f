#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace topoctl::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { LessEqual, GreaterEqual, Equal };

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  bool integer = false;
};

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

// min  c'x + sum_j q_j x_j^2 + constant  over linear rows and bounds, with
// optional integrality. q_j >= 0 keeps the objective convex.
class Model {
public:
  int add_variable(std::string name, double lower, double upper, bool integer = false, double cost = 0.0);
  int add_binary(std::string name, double cost = 0.0) { return add_variable(std::move(name), 0.0, 1.0, true, cost); }
  // Merges duplicate variable references; throws ArgumentError on unknown variables.
  int add_constraint(std::string name, std::vector<Term> terms, Sense sense, double rhs);

  void set_cost(int var, double cost) { linear_.at(static_cast<std::size_t>(var)) = cost; }
  void add_cost(int var, double cost) { linear_.at(static_cast<std::size_t>(var)) += cost; }
  void add_quadratic(int var, double coef);  // adds coef * x_var^2; coef >= 0
  void add_constant(double c) { constant_ += c; }
  void set_bounds(int var, double lower, double upper);
  void set_integer(int var, bool integer) { vars_.at(static_cast<std::size_t>(var)).integer = integer; }

  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return rows_; }
  const std::vector<double>& linear() const { return linear_; }
  const std::vector<double>& quadratic() const { return quad_; }
  double constant() const { return constant_; }

  std::size_t num_variables() const { return vars_.size(); }
  std::size_t num_constraints() const { return rows_.size(); }
  std::size_t num_integers() const;
  bool has_quadratic() const;

  double objective_value(const std::vector<double>& x) const;

private:
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  std::vector<double> linear_;
  std::vector<double> quad_;
  double constant_ = 0.0;
};

// Same model with every integrality flag dropped.
Model lp_relaxation(const Model& model);

// Largest signed violation over rows and bounds (<= 0 when feasible).
// Throws ArgumentError when `values` does not cover every variable.
double verify_solution(const Model& model, const std::vector<double>& values);

// Largest distance of an integer variable from the nearest integer.
double integrality_violation(const Model& model, const std::vector<double>& values);

// CPLEX LP text format, for cross-checking with external solvers.
std::string to_lp_format(const Model& model);

}  // namespace topoctl::milp
