#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "formulation/formulation.hpp"
#include "netmodel/network.hpp"
#include "ph/ph.hpp"
#include "scenariogen/scenarios.hpp"

namespace topoctl {

struct ExperimentConfig {
  std::string case_path;
  std::string risk_path;
  bool zero_gen_lower = false;
  std::vector<int> scenario_counts;  // empty = 20, 40, ..., 200
  std::vector<double> scalings{1.0, 1.05};
  std::vector<double> thresholds{0.0};
  std::vector<std::uint64_t> seeds{1};
  int budget = 5;
  int max_outages = 4;
  std::vector<std::string> methods{"extensive", "ph"};
  std::vector<std::string> modes{"serial", "parallel"};
  std::vector<Kind> formulations{Kind::Preventive, Kind::Corrective};
  PhConfig ph;
  milp::SolverConfig solver;

  std::vector<int> counts() const;
};

// Throws ArgumentError on unknown keys or bad values.
ExperimentConfig experiment_config_from_json(const std::string& text);

struct ResultRow {
  std::string formulation;
  std::string method;
  std::string mode;
  int scenarios = 0;
  double scaling = 1.0;
  double threshold = 0.0;
  std::uint64_t seed = 0;
  std::string status;
  double seconds = 0.0;
  long long iterations = 0;
  double objective = 0.0;
  double expected_load_shed_mw = 0.0;
  double relative_gap_vs_preventive = 0.0;
  std::string scenario_hash;
  double max_residual = 0.0;
  bool has_values = false;
};

struct SolveOptions {
  Kind kind = Kind::Preventive;
  std::string method = "extensive";  // or "ph"
  int budget = 5;
  double load_scaling = 1.0;
  PhMode mode = PhMode::Serial;
  PhConfig ph;
  milp::SolverConfig solver;
};

// Keys: formulation, method, budget, load_scaling, mode, threads, ph{}, solver{}.
// Empty text gives the defaults.
SolveOptions solve_options_from_json(const std::string& text);

// Solves one cell with one method; extensive timing covers the MILP solve,
// PH timing covers ph_solve.
struct CellOutcome {
  std::string status;
  double seconds = 0.0;
  long long iterations = 0;
  bool has_report = false;
  SolutionReport report;
  PhResult ph;
};

CellOutcome solve_cell(const Network& net, const ScenarioSet& set, Kind kind, int budget, double scaling,
                       const std::string& method, PhMode mode, const PhConfig& ph, const milp::SolverConfig& solver);

CellOutcome solve(const Network& net, const ScenarioSet& set, const SolveOptions& options);

// Loads the case (filling default costs when it carries none) and the risk file.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, const Network& net, const RiskMap& risk);

std::string rows_to_csv(const std::vector<ResultRow>& rows);

// "k,lines" rows for k = 1..|S|.
std::string histogram_csv(const std::vector<int>& counts);
std::string histogram_svg(const std::vector<int>& counts, const std::string& title);

struct ConfidenceConfig {
  int scenarios = 200;
  int max_outages = 4;
  int budget = 5;
  int concentrated_lines = 4;
  double scaling = 1.0;
  std::vector<std::uint64_t> seeds{1};
  std::string method = "ph";
  PhConfig ph;
  milp::SolverConfig solver;
};

struct ConfidenceRow {
  std::string arm;  // "dispersed" (R = 0) or "concentrated"
  double threshold = 0.0;
  std::uint64_t seed = 0;
  double preventive_shed_mw = 0.0;
  double corrective_shed_mw = 0.0;
  double preventive_objective = 0.0;
  double corrective_objective = 0.0;
};

struct ConfidenceSummary {
  std::vector<ConfidenceRow> rows;
  double dispersed_preventive_mw = 0.0;
  double dispersed_corrective_mw = 0.0;
  double concentrated_preventive_mw = 0.0;
  double concentrated_corrective_mw = 0.0;
  double dispersed_gap = 0.0;      // (preventive - corrective) / preventive of the mean shed
  double concentrated_gap = 0.0;
  bool gap_shrinks = false;        // concentrated_gap < dispersed_gap
};

ConfidenceConfig confidence_config_from_json(const std::string& text);

// Relative shed gap, 0 when the preventive shed is 0.
double relative_gap(double preventive, double corrective);

ConfidenceSummary confidence_study(const Network& net, const RiskMap& risk, const ConfidenceConfig& cfg);
std::string confidence_to_csv(const ConfidenceSummary& summary);

}  // namespace topoctl
