#pragma once

#include <string>
#include <vector>

#include "formulation/formulation.hpp"
#include "milp/solver.hpp"

namespace topoctl {

enum class PhMode { Serial, Parallel };

struct PhConfig {
  double primal_tol = 1e-3;
  double dual_tol = 1e-2;
  int max_iterations = 200;
  double alpha = 1.0;    // penalty scale
  double gamma = 1.1;    // penalty growth on a stalled iteration
  double stall = 0.01;   // relative primal-gap improvement counted as progress
  double min_penalty = 1e-3;
  bool fixed_penalty = false;
  // Disagreeing binaries are fixed to their vote (averaged over the window)
  // once the dual gap has not improved by `stall` for this many iterations;
  // 0 disables.
  int slam_after = 10;
  PhMode mode = PhMode::Serial;
  int threads = 0;  // parallel workers, 0 = hardware concurrency
  milp::SolverConfig solver;
};

struct PhIteration {
  int iteration = 0;
  double primal_gap = 0.0;  // infinity at k = 0
  double dual_gap = 0.0;
  double penalty_mean = 0.0;
  double seconds = 0.0;
  double multiplier_sum = 0.0;  // max_j |sum_s pi_s rho_sj|
};

struct PhState {
  int k = 0;
  std::vector<double> probabilities;
  std::vector<std::vector<double>> x;    // per scenario first-stage iterate
  std::vector<double> xbar;
  std::vector<std::vector<double>> rho;  // per scenario multipliers
  std::vector<double> penalty;           // per variable
  std::vector<PhIteration> history;
};

struct PhResult {
  SolutionReport report;  // first stage fixed, every scenario re-solved
  std::vector<double> first_stage;
  std::vector<int> binaries;  // consensus switching (preventive)
  double objective = 0.0;
  int iterations = 0;
  std::string terminated_by;  // "tolerance" or "iteration-limit"
  int slammed = 0;            // times disagreeing binaries were fixed
  std::vector<PhIteration> trace;
  std::vector<std::vector<double>> xbar_history;
};

// xbar = sum_s pi_s x_s for probabilities summing to 1, computed as
// x_0 + sum_s pi_s (x_s - x_0) in scenario order.
std::vector<double> aggregate(const std::vector<std::vector<double>>& x, const std::vector<double>& probabilities);

// rho_s += penalty .* (x_s - xbar) for every scenario, then re-centred so
// that sum_s pi_s rho_s stays at zero in floating point.
void update_multipliers(std::vector<std::vector<double>>& rho, const std::vector<std::vector<double>>& x,
                        const std::vector<double>& xbar, const std::vector<double>& penalty,
                        const std::vector<double>& probabilities);

// r_j = alpha |c_j| / (ub_j - lb_j + 1), floored at min_penalty.
std::vector<double> initial_penalty(const std::vector<double>& cost, const std::vector<double>& lower,
                                    const std::vector<double>& upper, double alpha, double min_penalty);

// Scales r by gamma when the primal gap improved by less than the stall
// fraction; needs the two latest gaps.
bool update_penalty(std::vector<double>& penalty, double previous_gap, double current_gap, const PhConfig& cfg);

double primal_gap(const std::vector<double>& xbar, const std::vector<double>& previous);
double dual_gap(const std::vector<std::vector<double>>& x, const std::vector<double>& xbar,
                const std::vector<double>& probabilities);
bool converged(int k, double primal, double dual, const PhConfig& cfg);

// Two-stage solve by scenario decomposition. Kind must be preventive or
// corrective.
PhResult ph_solve(const Network& net, const ScenarioSet& scenarios, const FormulationConfig& fcfg,
                  const PhConfig& cfg);

// Fixes the first stage, re-solves every scenario and assembles a report.
SolutionReport evaluate_first_stage(const Network& net, const ScenarioSet& scenarios, const FormulationConfig& fcfg,
                                    const std::vector<double>& first_stage, const milp::SolverConfig& solver,
                                    int threads = 1);

std::string trace_to_csv(const std::vector<PhIteration>& trace);

}  // namespace topoctl
