#pragma once

#include <string>
#include <vector>

#include "milp/model.hpp"
#include "milp/solver.hpp"
#include "netmodel/network.hpp"
#include "scenariogen/scenarios.hpp"

namespace topoctl {

enum class Kind { Deterministic, Preventive, Corrective };

std::string to_string(Kind kind);
Kind parse_kind(const std::string& text);

struct FormulationConfig {
  Kind kind = Kind::Preventive;
  int budget = 5;
  double big_m = 0.0;         // 0 = big_m_theta(net)
  double load_scaling = 1.0;  // applied to the network by every builder
};

// Variable indices of one scenario's recourse block; -1 where a bus has no
// such variable (no generator, no demand) or a line has no switch.
struct ScenarioBlock {
  int id = 0;
  double probability = 1.0;
  std::vector<int> theta;
  std::vector<int> ramp_up;
  std::vector<int> ramp_down;
  std::vector<int> shed;
  std::vector<int> flow;
  std::vector<int> sw;        // corrective: per-scenario switch of each line
};

// Where the pieces of a built model live. For deterministic models the
// single block holds angles and flows; `sw` of the first stage means "line
// closed" there, and "action taken" (open an on-line, close an off-line)
// otherwise.
struct Layout {
  Kind kind = Kind::Preventive;
  int budget = 0;
  double load_scaling = 1.0;
  double big_m = 0.0;
  std::vector<int> pg;  // per bus
  std::vector<int> sw;  // per line, first stage
  std::vector<ScenarioBlock> blocks;

  // First-stage vector used by the hedging loop: generator outputs in bus
  // order, then (preventive only) switches in line order.
  std::vector<int> first_stage() const;
};

struct BuiltModel {
  milp::Model model;
  Layout layout;
};

BuiltModel build_deterministic(const Network& net, const FormulationConfig& cfg);
// Extensive form over every scenario of the set. Throws ArgumentError on an
// empty set.
BuiltModel build_preventive(const Network& net, const ScenarioSet& scenarios, const FormulationConfig& cfg);
BuiltModel build_corrective(const Network& net, const ScenarioSet& scenarios, const FormulationConfig& cfg);
// Dispatches on cfg.kind; `scenarios` is ignored for deterministic models.
BuiltModel build(const Network& net, const ScenarioSet& scenarios, const FormulationConfig& cfg);

// Single-scenario model (probability 1) for scenario index `s` of the set.
BuiltModel build_scenario(const Network& net, const ScenarioSet& scenarios, std::size_t s, const FormulationConfig& cfg);

// Adds rho.(x - anchor) + sum_j penalty_j/2 (x_j - anchor_j)^2 over the
// first-stage vector. Binary entries use z^2 = z so their terms stay linear.
void add_proximal_terms(BuiltModel& built, const std::vector<double>& anchor, const std::vector<double>& rho,
                        const std::vector<double>& penalty);

BuiltModel build_ph_subproblem(const Network& net, const ScenarioSet& scenarios, std::size_t s,
                               const FormulationConfig& cfg, const std::vector<double>& anchor,
                               const std::vector<double>& rho, const std::vector<double>& penalty);

// ---- Reports ----------------------------------------------------------

struct ScenarioReport {
  int id = 0;
  double probability = 1.0;
  std::vector<LineKey> out_lines;
  std::vector<double> theta;      // per bus
  std::vector<double> ramp_up;    // per bus
  std::vector<double> ramp_down;  // per bus
  std::vector<double> shed;       // per bus, p.u.
  std::vector<double> flow;       // per line
  std::vector<int> switched;      // corrective: per line action flags
  double shed_mw = 0.0;
  double cost = 0.0;  // recourse cost of this scenario
};

struct SolutionReport {
  Kind kind = Kind::Preventive;
  std::string status = "optimal";
  int budget = 0;
  double load_scaling = 1.0;
  double base_mva = 100.0;
  double objective = 0.0;
  double generation_cost = 0.0;
  double ramp_cost = 0.0;  // expected ramping plus the extra cost of up-ramped energy
  double voll_cost = 0.0;
  double expected_shed_mw = 0.0;
  double total_generation = 0.0;  // first-stage sum, p.u.
  std::vector<int> bus_ids;
  std::vector<LineKey> line_keys;
  std::vector<double> pg;
  std::vector<int> switched;  // first-stage actions: open an on-line, close an off-line
  std::vector<ScenarioReport> scenarios;
  double max_residual = 0.0;
};

// Reads a solved model back into physical quantities and recomputes the
// objective from them. Throws SolveError unless `solution` is optimal (or
// carries an incumbent when `allow_incumbent` is set).
SolutionReport extract_report(const BuiltModel& built, const milp::Solution& solution, const Network& net,
                              const ScenarioSet& scenarios, bool allow_incumbent = false);

// Independent check of balance, flow physics, switching logic and bounds
// straight from the network data. Returns the largest residual.
double verify_physics(const SolutionReport& report, const Network& net, const ScenarioSet& scenarios);

// Recomputes the objective pieces of a report in place.
void recompute_costs(SolutionReport& report, const Network& net);

std::string report_to_json(const SolutionReport& report);
// Reads report_to_json output back against the network it was solved on.
SolutionReport report_from_json(const std::string& text, const Network& net);

}  // namespace topoctl
