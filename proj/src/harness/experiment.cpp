#include "harness/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "common/errors.hpp"
#include "json.hpp"

namespace topoctl {

using nlohmann::json;

std::vector<int> ExperimentConfig::counts() const {
  if (!scenario_counts.empty()) return scenario_counts;
  std::vector<int> out;
  for (int n = 20; n <= 200; n += 20) out.push_back(n);
  return out;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ArgumentError("unknown key '" + it.key() + "' in " + where);
}

template <class T>
std::vector<T> list_of(const json& j, const char* key) {
  if (!j.is_array()) throw ArgumentError(std::string(key) + " must be a list");
  return j.get<std::vector<T>>();
}

std::string fmt(double v, const char* spec = "%.10g") {
  if (!std::isfinite(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json parse_object(const std::string& text, const std::string& what) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(what + ": " + e.what());
  }
  if (!j.is_object()) throw ArgumentError(what + " must be a JSON object");
  return j;
}

void read_ph(const json& p, PhConfig& ph) {
  if (!p.is_object()) throw ArgumentError("ph must be an object");
  check_keys(p, {"primal_tol", "dual_tol", "max_iterations", "alpha", "gamma", "stall", "fixed_penalty", "slam_after"}, "ph");
  ph.primal_tol = p.value("primal_tol", ph.primal_tol);
  ph.dual_tol = p.value("dual_tol", ph.dual_tol);
  ph.max_iterations = p.value("max_iterations", ph.max_iterations);
  ph.alpha = p.value("alpha", ph.alpha);
  ph.gamma = p.value("gamma", ph.gamma);
  ph.stall = p.value("stall", ph.stall);
  ph.fixed_penalty = p.value("fixed_penalty", ph.fixed_penalty);
  ph.slam_after = p.value("slam_after", ph.slam_after);
  if (ph.max_iterations < 1) throw ArgumentError("ph.max_iterations must be at least 1");
  if (ph.gamma < 1.0) throw ArgumentError("ph.gamma must be at least 1");
  if (ph.slam_after < 0) throw ArgumentError("ph.slam_after must be non-negative");
}

void read_solver(const json& s, milp::SolverConfig& solver) {
  if (!s.is_object()) throw ArgumentError("solver must be an object");
  check_keys(s, {"gap", "node_limit", "time_limit", "quad_segments"}, "solver");
  solver.gap = s.value("gap", solver.gap);
  solver.node_limit = s.value("node_limit", solver.node_limit);
  solver.time_limit = s.value("time_limit", solver.time_limit);
  solver.quad_segments = s.value("quad_segments", solver.quad_segments);
  if (solver.quad_segments < 1) throw ArgumentError("solver.quad_segments must be at least 1");
}

PhMode parse_mode(const std::string& m) {
  if (m == "serial") return PhMode::Serial;
  if (m == "parallel") return PhMode::Parallel;
  throw ArgumentError("unknown mode '" + m + "' (expected serial or parallel)");
}

void check_method(const std::string& m) {
  if (m != "extensive" && m != "ph") throw ArgumentError("unknown method '" + m + "' (expected extensive or ph)");
}

}  // namespace

ExperimentConfig experiment_config_from_json(const std::string& text) {
  const json j = parse_object(text, "experiment config");
  check_keys(j,
             {"case", "risk", "zero_gen_lower", "scenario_counts", "scalings", "thresholds", "seeds", "budget",
              "max_outages", "methods", "modes", "formulations", "threads", "ph", "solver"},
             "experiment config");
  ExperimentConfig cfg;
  try {
    if (j.contains("case")) cfg.case_path = j["case"].get<std::string>();
    if (j.contains("risk")) cfg.risk_path = j["risk"].get<std::string>();
    if (j.contains("zero_gen_lower")) cfg.zero_gen_lower = j["zero_gen_lower"].get<bool>();
    if (j.contains("scenario_counts")) cfg.scenario_counts = list_of<int>(j["scenario_counts"], "scenario_counts");
    if (j.contains("scalings")) cfg.scalings = list_of<double>(j["scalings"], "scalings");
    if (j.contains("thresholds")) cfg.thresholds = list_of<double>(j["thresholds"], "thresholds");
    if (j.contains("seeds")) cfg.seeds = list_of<std::uint64_t>(j["seeds"], "seeds");
    if (j.contains("budget")) cfg.budget = j["budget"].get<int>();
    if (j.contains("max_outages")) cfg.max_outages = j["max_outages"].get<int>();
    if (j.contains("methods")) cfg.methods = list_of<std::string>(j["methods"], "methods");
    if (j.contains("modes")) cfg.modes = list_of<std::string>(j["modes"], "modes");
    if (j.contains("formulations")) {
      cfg.formulations.clear();
      for (const auto& f : list_of<std::string>(j["formulations"], "formulations")) cfg.formulations.push_back(parse_kind(f));
    }
    if (j.contains("threads")) cfg.ph.threads = j["threads"].get<int>();
    if (j.contains("ph")) read_ph(j["ph"], cfg.ph);
    if (j.contains("solver")) read_solver(j["solver"], cfg.solver);
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("experiment config: ") + e.what());
  }
  cfg.ph.solver = cfg.solver;
  for (const auto& m : cfg.methods) check_method(m);
  for (const auto& m : cfg.modes) parse_mode(m);
  if (cfg.budget < 0) throw ArgumentError("budget must be nonnegative");
  if (cfg.max_outages < 1) throw ArgumentError("max_outages must be at least 1");
  if (cfg.scalings.empty() || cfg.seeds.empty() || cfg.thresholds.empty() || cfg.methods.empty() ||
      cfg.formulations.empty())
    throw ArgumentError("experiment sweeps must be nonempty");
  return cfg;
}

SolveOptions solve_options_from_json(const std::string& text) {
  SolveOptions o;
  if (text.empty()) return o;
  const json j = parse_object(text, "solve options");
  check_keys(j, {"formulation", "method", "budget", "load_scaling", "mode", "threads", "ph", "solver"},
             "solve options");
  try {
    if (j.contains("formulation")) o.kind = parse_kind(j["formulation"].get<std::string>());
    if (j.contains("method")) o.method = j["method"].get<std::string>();
    o.budget = j.value("budget", o.budget);
    o.load_scaling = j.value("load_scaling", o.load_scaling);
    if (j.contains("mode")) o.mode = parse_mode(j["mode"].get<std::string>());
    o.ph.threads = j.value("threads", o.ph.threads);
    if (j.contains("ph")) read_ph(j["ph"], o.ph);
    if (j.contains("solver")) read_solver(j["solver"], o.solver);
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("solve options: ") + e.what());
  }
  check_method(o.method);
  if (o.budget < 0) throw ArgumentError("budget must be nonnegative");
  if (!(o.load_scaling > 0.0)) throw ArgumentError("load_scaling must be positive");
  if (o.kind == Kind::Deterministic && o.method == "ph")
    throw ArgumentError("the deterministic formulation has no scenarios to decompose; use method extensive");
  o.ph.solver = o.solver;
  return o;
}

CellOutcome solve(const Network& net, const ScenarioSet& set, const SolveOptions& o) {
  return solve_cell(net, set, o.kind, o.budget, o.load_scaling, o.method, o.mode, o.ph, o.solver);
}

CellOutcome solve_cell(const Network& net, const ScenarioSet& set, Kind kind, int budget, double scaling,
                       const std::string& method, PhMode mode, const PhConfig& ph, const milp::SolverConfig& solver) {
  FormulationConfig fcfg;
  fcfg.kind = kind;
  fcfg.budget = budget;
  fcfg.load_scaling = scaling;
  CellOutcome out;
  try {
    if (method == "extensive") {
      const BuiltModel built = build(net, set, fcfg);
      const auto t0 = std::chrono::steady_clock::now();
      const milp::Solution sol = milp::solve(built.model, solver);
      out.seconds = seconds_since(t0);
      out.status = milp::to_string(sol.status);
      out.iterations = sol.stats.nodes;
      if (!sol.values.empty()) {
        out.report = extract_report(built, sol, net, set, true);
        out.has_report = true;
      }
    } else {
      PhConfig cfg = ph;
      cfg.mode = mode;
      const auto t0 = std::chrono::steady_clock::now();
      out.ph = ph_solve(net, set, fcfg, cfg);
      out.seconds = seconds_since(t0);
      out.status = out.ph.terminated_by == "tolerance" ? "optimal" : "iteration-limit";
      out.iterations = out.ph.iterations;
      out.report = out.ph.report;
      out.has_report = true;
    }
  } catch (const SolveError& e) {
    out.status = std::string("error: ") + e.what();
    out.has_report = false;
  }
  return out;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  if (cfg.case_path.empty() || cfg.risk_path.empty()) throw ArgumentError("experiment needs a case and a risk file");
  CaseOptions opts;
  opts.zero_gen_lower = cfg.zero_gen_lower;
  const Network net = fill_default_costs(load_network_file(cfg.case_path, opts));
  const RiskMap risk = load_risk(read_file(cfg.risk_path));
  risk.check_against(net);
  return run_experiment(cfg, net, risk);
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, const Network& net, const RiskMap& risk) {
  std::vector<ResultRow> rows;
  for (double threshold : cfg.thresholds)
    for (double scaling : cfg.scalings)
      for (int count : cfg.counts())
        for (std::uint64_t seed : cfg.seeds) {
          const ScenarioSet set = generate(risk, threshold, count, cfg.max_outages, seed);
          const std::string hash = scenario_hash(set);
          for (const std::string& method : cfg.methods) {
            std::vector<std::string> modes{"serial"};
            if (method == "ph") modes = cfg.modes;
            for (const std::string& mode : modes) {
              double preventive = NAN;
              for (Kind kind : cfg.formulations) {
                const CellOutcome out =
                    solve_cell(net, set, kind, cfg.budget, scaling, method,
                               mode == "parallel" ? PhMode::Parallel : PhMode::Serial, cfg.ph, cfg.solver);
                ResultRow row;
                row.formulation = to_string(kind);
                row.method = method;
                row.mode = mode;
                row.scenarios = count;
                row.scaling = scaling;
                row.threshold = threshold;
                row.seed = seed;
                row.status = out.status;
                row.seconds = out.seconds;
                row.iterations = out.iterations;
                row.scenario_hash = hash;
                row.objective = NAN;
                row.expected_load_shed_mw = NAN;
                row.relative_gap_vs_preventive = NAN;
                if (out.has_report) {
                  row.has_values = true;
                  row.objective = out.report.objective;
                  row.expected_load_shed_mw = out.report.expected_shed_mw;
                  row.max_residual = out.report.max_residual;
                  if (kind == Kind::Preventive) preventive = row.objective;
                  if (std::isfinite(preventive) && preventive != 0.0)
                    row.relative_gap_vs_preventive = (preventive - row.objective) / preventive;
                }
                rows.push_back(row);
              }
            }
          }
        }
  return rows;
}

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << "formulation,method,mode,scenarios,scaling,threshold,seed,status,seconds,iterations,objective,"
        "expected_load_shed_mw,relative_gap_vs_preventive,scenario_hash\n";
  for (const auto& r : rows) {
    std::string status = r.status;
    for (char& c : status)
      if (c == ',' || c == '\n') c = ';';
    os << r.formulation << ',' << r.method << ',' << r.mode << ',' << r.scenarios << ',' << fmt(r.scaling) << ','
       << fmt(r.threshold) << ',' << r.seed << ',' << status << ',' << fmt(r.seconds, "%.6f") << ',' << r.iterations
       << ',' << fmt(r.objective) << ',' << fmt(r.expected_load_shed_mw) << ','
       << fmt(r.relative_gap_vs_preventive) << ',' << r.scenario_hash << '\n';
  }
  return os.str();
}

std::string histogram_csv(const std::vector<int>& counts) {
  std::ostringstream os;
  os << "k,lines\n";
  for (std::size_t k = 0; k < counts.size(); ++k) os << k + 1 << ',' << counts[k] << '\n';
  return os.str();
}

std::string histogram_svg(const std::vector<int>& counts, const std::string& title) {
  const int width = 640, height = 360, left = 50, bottom = 40, top = 30;
  const int plot_w = width - left - 20, plot_h = height - bottom - top;
  int peak = 1;
  for (int c : counts) peak = std::max(peak, c);
  const double bar = counts.empty() ? 0.0 : static_cast<double>(plot_w) / static_cast<double>(counts.size());
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  os << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
     << top + plot_h << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
     << "\" stroke=\"black\"/>\n";
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double h = plot_h * static_cast<double>(counts[k]) / peak;
    os << "<rect x=\"" << fmt(left + bar * static_cast<double>(k) + 0.1 * bar, "%.2f") << "\" y=\""
       << fmt(top + plot_h - h, "%.2f") << "\" width=\"" << fmt(0.8 * bar, "%.2f") << "\" height=\""
       << fmt(h, "%.2f") << "\" fill=\"steelblue\"/>\n";
  }
  os << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10
     << "\" text-anchor=\"middle\" font-size=\"12\">minimum number of scenarios k</text>\n";
  os << "<text x=\"15\" y=\"" << top + plot_h / 2 << "\" font-size=\"12\" transform=\"rotate(-90 15 "
     << top + plot_h / 2 << ")\" text-anchor=\"middle\">lines</text>\n";
  os << "<text x=\"" << left - 5 << "\" y=\"" << top + 5 << "\" text-anchor=\"end\" font-size=\"10\">" << peak
     << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

ConfidenceConfig confidence_config_from_json(const std::string& text) {
  ConfidenceConfig c;
  if (text.empty()) return c;
  const json j = parse_object(text, "confidence config");
  check_keys(j,
             {"scenarios", "max_outages", "budget", "concentrated_lines", "scaling", "seeds", "method", "threads",
              "ph", "solver"},
             "confidence config");
  try {
    c.scenarios = j.value("scenarios", c.scenarios);
    c.max_outages = j.value("max_outages", c.max_outages);
    c.budget = j.value("budget", c.budget);
    c.concentrated_lines = j.value("concentrated_lines", c.concentrated_lines);
    c.scaling = j.value("scaling", c.scaling);
    if (j.contains("seeds")) c.seeds = list_of<std::uint64_t>(j["seeds"], "seeds");
    c.method = j.value("method", c.method);
    c.ph.threads = j.value("threads", c.ph.threads);
    if (j.contains("ph")) read_ph(j["ph"], c.ph);
    if (j.contains("solver")) read_solver(j["solver"], c.solver);
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("confidence config: ") + e.what());
  }
  check_method(c.method);
  if (c.scenarios < 1) throw ArgumentError("scenarios must be at least 1");
  if (c.max_outages < 1) throw ArgumentError("max_outages must be at least 1");
  if (c.concentrated_lines < 1) throw ArgumentError("concentrated_lines must be at least 1");
  if (c.seeds.empty()) throw ArgumentError("confidence study needs at least one seed");
  c.ph.solver = c.solver;
  return c;
}

double relative_gap(double preventive, double corrective) {
  return preventive > 0.0 ? (preventive - corrective) / preventive : 0.0;
}

ConfidenceSummary confidence_study(const Network& net, const RiskMap& risk, const ConfidenceConfig& cfg) {
  if (cfg.seeds.empty()) throw ArgumentError("confidence study needs at least one seed");
  const double concentrated = threshold_for_k_lines(risk, cfg.concentrated_lines);
  ConfidenceSummary sum;
  for (const auto& [arm, threshold] : {std::pair<std::string, double>{"dispersed", 0.0}, {"concentrated", concentrated}}) {
    double prev = 0.0, corr = 0.0;
    for (std::uint64_t seed : cfg.seeds) {
      const ScenarioSet set = generate(risk, threshold, cfg.scenarios, cfg.max_outages, seed);
      ConfidenceRow row;
      row.arm = arm;
      row.threshold = threshold;
      row.seed = seed;
      for (Kind kind : {Kind::Preventive, Kind::Corrective}) {
        const CellOutcome out =
            solve_cell(net, set, kind, cfg.budget, cfg.scaling, cfg.method, PhMode::Parallel, cfg.ph, cfg.solver);
        if (!out.has_report)
          throw SolveError(to_string(kind) + " solve failed in the " + arm + " arm (seed " + std::to_string(seed) +
                           "): " + out.status);
        (kind == Kind::Preventive ? row.preventive_shed_mw : row.corrective_shed_mw) = out.report.expected_shed_mw;
        (kind == Kind::Preventive ? row.preventive_objective : row.corrective_objective) = out.report.objective;
      }
      prev += row.preventive_shed_mw;
      corr += row.corrective_shed_mw;
      sum.rows.push_back(row);
    }
    prev /= static_cast<double>(cfg.seeds.size());
    corr /= static_cast<double>(cfg.seeds.size());
    if (arm == "dispersed") {
      sum.dispersed_preventive_mw = prev;
      sum.dispersed_corrective_mw = corr;
      sum.dispersed_gap = relative_gap(prev, corr);
    } else {
      sum.concentrated_preventive_mw = prev;
      sum.concentrated_corrective_mw = corr;
      sum.concentrated_gap = relative_gap(prev, corr);
    }
  }
  sum.gap_shrinks = sum.concentrated_gap < sum.dispersed_gap;
  return sum;
}

std::string confidence_to_csv(const ConfidenceSummary& s) {
  std::ostringstream os;
  os << "arm,threshold,seed,preventive_shed_mw,corrective_shed_mw,preventive_objective,corrective_objective\n";
  for (const auto& r : s.rows)
    os << r.arm << ',' << fmt(r.threshold) << ',' << r.seed << ',' << fmt(r.preventive_shed_mw) << ','
       << fmt(r.corrective_shed_mw) << ',' << fmt(r.preventive_objective) << ',' << fmt(r.corrective_objective)
       << '\n';
  return os.str();
}

}  // namespace topoctl
