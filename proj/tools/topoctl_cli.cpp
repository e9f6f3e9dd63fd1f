// topoctl command line: scenario generation, solves, sweeps and the
// risk-concentration study. Talks to the library only through the C API.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "topoctl/topoctl.h"

using nlohmann::json;

namespace {

struct Failure {
  int code;
};

void check(topoctl_status st) {
  if (st == TOPOCTL_OK) return;
  std::cerr << "topoctl: " << topoctl_status_name(st) << ": " << topoctl_last_error() << "\n";
  throw Failure{st == TOPOCTL_ERR_ARGUMENT || st == TOPOCTL_ERR_IO ? 2 : 1};
}

struct Deleter {
  void operator()(topoctl_network* p) const { topoctl_network_free(p); }
  void operator()(topoctl_risk* p) const { topoctl_risk_free(p); }
  void operator()(topoctl_scenarios* p) const { topoctl_scenarios_free(p); }
  void operator()(topoctl_report* p) const { topoctl_report_free(p); }
  void operator()(char* p) const { topoctl_string_free(p); }
};
template <class T>
using Owned = std::unique_ptr<T, Deleter>;

std::string take(char* s) {
  Owned<char> hold(s);
  return s ? std::string(s) : std::string();
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "topoctl: cannot open " << path << "\n";
    throw Failure{2};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// "-" or empty writes to stdout.
void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "topoctl: cannot write " << path << "\n";
    throw Failure{2};
  }
  out << text;
}

Owned<topoctl_network> load_network(const std::string& path, bool zero_gen_lower) {
  topoctl_network* net = nullptr;
  unsigned flags = TOPOCTL_LOAD_DEFAULT_COSTS;
  if (zero_gen_lower) flags |= TOPOCTL_LOAD_ZERO_GEN_LOWER;
  check(topoctl_network_load(path.c_str(), flags, &net));
  return Owned<topoctl_network>(net);
}

Owned<topoctl_risk> load_risk(const std::string& path, const topoctl_network* net) {
  topoctl_risk* risk = nullptr;
  check(topoctl_risk_load(path.c_str(), net, &risk));
  return Owned<topoctl_risk>(risk);
}

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string backend = "bnb";
};

struct GenerateArgs {
  std::string risk, network, out, hist_csv, hist_svg;
  double threshold = 0.0;
  int count = 20;
  int max_outages = 4;
};

int run_generate(const Globals& g, const GenerateArgs& a) {
  Owned<topoctl_network> net;
  if (!a.network.empty()) net = load_network(a.network, false);
  Owned<topoctl_risk> risk = load_risk(a.risk, net.get());
  topoctl_scenarios* set = nullptr;
  check(topoctl_scenarios_generate(risk.get(), a.threshold, a.count, a.max_outages, g.seed.value_or(1), &set));
  Owned<topoctl_scenarios> hold(set);
  char* text = nullptr;
  check(topoctl_scenarios_to_jsonl(set, &text));
  write_text(a.out, take(text));
  if (!a.hist_csv.empty()) {
    check(topoctl_scenarios_histogram_csv(set, &text));
    write_text(a.hist_csv, take(text));
  }
  if (!a.hist_svg.empty()) {
    const std::string title = "lines outaged in at least k of " + std::to_string(a.count) + " scenarios";
    check(topoctl_scenarios_histogram_svg(set, title.c_str(), &text));
    write_text(a.hist_svg, take(text));
  }
  return 0;
}

struct SolveArgs {
  std::string network, scenarios, risk, options, out, trace;
  std::string formulation = "preventive", method = "extensive", mode = "serial";
  int budget = 5;
  double scaling = 1.0;
  double threshold = 0.0;
  int count = 20;
  int max_outages = 4;
  bool zero_gen_lower = false;
};

int run_solve(const Globals& g, const SolveArgs& a) {
  Owned<topoctl_network> net = load_network(a.network, a.zero_gen_lower);
  Owned<topoctl_scenarios> set;
  if (!a.scenarios.empty()) {
    topoctl_scenarios* s = nullptr;
    check(topoctl_scenarios_from_jsonl(read_text(a.scenarios).c_str(), &s));
    set.reset(s);
  } else if (!a.risk.empty()) {
    Owned<topoctl_risk> risk = load_risk(a.risk, net.get());
    topoctl_scenarios* s = nullptr;
    check(topoctl_scenarios_generate(risk.get(), a.threshold, a.count, a.max_outages, g.seed.value_or(1), &s));
    set.reset(s);
  } else if (a.formulation != "deterministic") {
    std::cerr << "topoctl: the " << a.formulation << " formulation needs --scenarios or --risk\n";
    return 2;
  }

  json opts = a.options.empty() ? json::object() : json::parse(read_text(a.options));
  opts["formulation"] = a.formulation;
  opts["method"] = a.method;
  opts["mode"] = a.mode;
  opts["budget"] = a.budget;
  opts["load_scaling"] = a.scaling;
  if (g.threads) opts["threads"] = *g.threads;

  topoctl_report* rep = nullptr;
  check(topoctl_solve(net.get(), set.get(), opts.dump().c_str(), &rep));
  Owned<topoctl_report> hold(rep);
  char* text = nullptr;
  check(topoctl_report_to_json(rep, &text));
  write_text(a.out, take(text));
  if (!a.trace.empty()) {
    check(topoctl_report_ph_trace_csv(rep, &text));
    write_text(a.trace, take(text));
  }
  double obj = 0.0, shed = 0.0, secs = 0.0;
  check(topoctl_report_objective(rep, &obj));
  check(topoctl_report_expected_shed_mw(rep, &shed));
  check(topoctl_report_seconds(rep, &secs));
  check(topoctl_report_status(rep, &text));
  std::fprintf(stderr, "%s %s: %s, objective %.6f, expected shed %.3f MW, %.3f s\n", a.formulation.c_str(),
               a.method.c_str(), take(text).c_str(), obj, shed, secs);
  return 0;
}

struct ExperimentArgs {
  std::string config, network, risk, out;
  std::vector<int> counts;
  std::vector<double> scalings, thresholds;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> methods, modes, formulations;
  std::optional<int> budget, max_outages;
  bool zero_gen_lower = false;
};

int run_experiment(const Globals& g, const ExperimentArgs& a) {
  json cfg = a.config.empty() ? json::object() : json::parse(read_text(a.config));
  if (!a.network.empty()) cfg["case"] = a.network;
  if (!a.risk.empty()) cfg["risk"] = a.risk;
  if (a.zero_gen_lower) cfg["zero_gen_lower"] = true;
  if (!a.counts.empty()) cfg["scenario_counts"] = a.counts;
  if (!a.scalings.empty()) cfg["scalings"] = a.scalings;
  if (!a.thresholds.empty()) cfg["thresholds"] = a.thresholds;
  if (!a.seeds.empty()) cfg["seeds"] = a.seeds;
  else if (g.seed) cfg["seeds"] = {*g.seed};
  if (!a.methods.empty()) cfg["methods"] = a.methods;
  if (!a.modes.empty()) cfg["modes"] = a.modes;
  if (!a.formulations.empty()) cfg["formulations"] = a.formulations;
  if (a.budget) cfg["budget"] = *a.budget;
  if (a.max_outages) cfg["max_outages"] = *a.max_outages;
  if (g.threads) cfg["threads"] = *g.threads;
  char* csv = nullptr;
  check(topoctl_experiment_run(cfg.dump().c_str(), &csv));
  write_text(a.out, take(csv));
  return 0;
}

struct ConfidenceArgs {
  std::string config, network, risk, out, summary;
  std::vector<std::uint64_t> seeds;
  std::optional<int> scenarios, max_outages, budget, lines;
  std::optional<double> scaling;
  std::string method;
  bool zero_gen_lower = false;
};

int run_confidence(const Globals& g, const ConfidenceArgs& a) {
  Owned<topoctl_network> net = load_network(a.network, a.zero_gen_lower);
  Owned<topoctl_risk> risk = load_risk(a.risk, net.get());
  json cfg = a.config.empty() ? json::object() : json::parse(read_text(a.config));
  if (!a.seeds.empty()) cfg["seeds"] = a.seeds;
  else if (g.seed) cfg["seeds"] = {*g.seed};
  if (a.scenarios) cfg["scenarios"] = *a.scenarios;
  if (a.max_outages) cfg["max_outages"] = *a.max_outages;
  if (a.budget) cfg["budget"] = *a.budget;
  if (a.lines) cfg["concentrated_lines"] = *a.lines;
  if (a.scaling) cfg["scaling"] = *a.scaling;
  if (!a.method.empty()) cfg["method"] = a.method;
  if (g.threads) cfg["threads"] = *g.threads;
  char* csv = nullptr;
  char* summary = nullptr;
  check(topoctl_confidence_study(net.get(), risk.get(), cfg.dump().c_str(), &csv, &summary));
  write_text(a.out, take(csv));
  const std::string s = take(summary);
  if (a.summary.empty())
    std::cerr << s;
  else
    write_text(a.summary, s);
  return 0;
}

struct VerifyArgs {
  std::string network, report, scenarios;
  double tolerance = 1e-6;
  bool zero_gen_lower = false;
};

int run_verify(const VerifyArgs& a) {
  Owned<topoctl_network> net = load_network(a.network, a.zero_gen_lower);
  topoctl_report* rep = nullptr;
  check(topoctl_report_from_json(read_text(a.report).c_str(), net.get(), &rep));
  Owned<topoctl_report> hold(rep);
  Owned<topoctl_scenarios> set;
  if (!a.scenarios.empty()) {
    topoctl_scenarios* s = nullptr;
    check(topoctl_scenarios_from_jsonl(read_text(a.scenarios).c_str(), &s));
    set.reset(s);
  }
  double residual = 0.0;
  check(topoctl_report_verify(rep, net.get(), set.get(), &residual));
  const bool ok = residual <= a.tolerance;
  std::printf("%s max residual %.3e (tolerance %.1e)\n", ok ? "ok" : "FAILED", residual, a.tolerance);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wildfire-aware preventive and corrective transmission switching"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(topoctl_version()));

  Globals g;
  app.add_option("--seed", g.seed, "RNG seed for scenario sampling");
  app.add_option("--threads", g.threads, "worker threads for parallel PH (0 = all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--backend", g.backend, "MILP backend")->check(CLI::IsMember({"bnb"}));

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate-scenarios", "sample outage scenarios from line risks");
  gen->add_option("--risk", ga.risk, "risk CSV (from,to,circuit,risk)")->required();
  gen->add_option("--case", ga.network, "network to check the risk file against");
  gen->add_option("--threshold", ga.threshold, "drop lines with risk below R");
  gen->add_option("--count", ga.count, "number of scenarios")->check(CLI::PositiveNumber);
  gen->add_option("--max-outages", ga.max_outages, "draws per scenario")->check(CLI::PositiveNumber);
  gen->add_option("-o,--out", ga.out, "JSONL output (default stdout)");
  gen->add_option("--histogram-csv", ga.hist_csv, "concentration histogram as CSV");
  gen->add_option("--histogram-svg", ga.hist_svg, "concentration histogram as SVG");

  SolveArgs sa;
  auto* sol = app.add_subcommand("solve", "solve one instance and print the report as JSON");
  sol->add_option("--case", sa.network, "MATPOWER or JSON network")->required();
  sol->add_option("--scenarios", sa.scenarios, "scenario JSONL");
  sol->add_option("--risk", sa.risk, "risk CSV to sample scenarios from when --scenarios is absent");
  sol->add_option("--threshold", sa.threshold);
  sol->add_option("--count", sa.count)->check(CLI::PositiveNumber);
  sol->add_option("--max-outages", sa.max_outages)->check(CLI::PositiveNumber);
  sol->add_option("--formulation", sa.formulation)
      ->check(CLI::IsMember({"deterministic", "preventive", "corrective"}));
  sol->add_option("--method", sa.method)->check(CLI::IsMember({"extensive", "ph"}));
  sol->add_option("--mode", sa.mode)->check(CLI::IsMember({"serial", "parallel"}));
  sol->add_option("--budget", sa.budget)->check(CLI::NonNegativeNumber);
  sol->add_option("--scaling", sa.scaling, "load scaling factor")->check(CLI::PositiveNumber);
  sol->add_option("--options", sa.options, "JSON file with ph{} and solver{} settings");
  sol->add_flag("--zero-gen-lower", sa.zero_gen_lower, "zero every generator lower bound");
  sol->add_option("-o,--out", sa.out, "report JSON (default stdout)");
  sol->add_option("--trace", sa.trace, "PH iteration trace CSV");

  ExperimentArgs ea;
  auto* exp = app.add_subcommand("experiment", "scenario-count and load-scaling sweep, CSV out");
  exp->add_option("--config", ea.config, "JSON config; flags override its keys");
  exp->add_option("--case", ea.network);
  exp->add_option("--risk", ea.risk);
  exp->add_option("--scenario-counts", ea.counts)->delimiter(',');
  exp->add_option("--scalings", ea.scalings)->delimiter(',');
  exp->add_option("--thresholds", ea.thresholds)->delimiter(',');
  exp->add_option("--seeds", ea.seeds)->delimiter(',');
  exp->add_option("--methods", ea.methods)->delimiter(',');
  exp->add_option("--modes", ea.modes)->delimiter(',');
  exp->add_option("--formulations", ea.formulations)->delimiter(',');
  exp->add_option("--budget", ea.budget);
  exp->add_option("--max-outages", ea.max_outages);
  exp->add_flag("--zero-gen-lower", ea.zero_gen_lower);
  exp->add_option("-o,--out", ea.out, "CSV output (default stdout)");

  ConfidenceArgs ca;
  auto* conf = app.add_subcommand("confidence-study", "compare shed gaps under dispersed and concentrated risk");
  conf->add_option("--case", ca.network)->required();
  conf->add_option("--risk", ca.risk)->required();
  conf->add_option("--config", ca.config, "JSON config; flags override its keys");
  conf->add_option("--seeds", ca.seeds)->delimiter(',');
  conf->add_option("--scenarios", ca.scenarios);
  conf->add_option("--max-outages", ca.max_outages);
  conf->add_option("--budget", ca.budget);
  conf->add_option("--lines", ca.lines, "lines left above the concentrated threshold");
  conf->add_option("--scaling", ca.scaling);
  conf->add_option("--method", ca.method)->check(CLI::IsMember({"extensive", "ph"}));
  conf->add_flag("--zero-gen-lower", ca.zero_gen_lower);
  conf->add_option("-o,--out", ca.out, "per-seed CSV (default stdout)");
  conf->add_option("--summary", ca.summary, "summary JSON (default stderr)");

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify", "recheck a report's physics against the network");
  ver->add_option("--case", va.network)->required();
  ver->add_option("--report", va.report)->required();
  ver->add_option("--scenarios", va.scenarios, "scenario JSONL (default: outages recorded in the report)");
  ver->add_option("--tolerance", va.tolerance);
  ver->add_flag("--zero-gen-lower", va.zero_gen_lower);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*gen) return run_generate(g, ga);
    if (*sol) return run_solve(g, sa);
    if (*exp) return run_experiment(g, ea);
    if (*conf) return run_confidence(g, ca);
    if (*ver) return run_verify(va);
  } catch (const Failure& f) {
    return f.code;
  } catch (const json::exception& e) {
    std::cerr << "topoctl: bad JSON: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
