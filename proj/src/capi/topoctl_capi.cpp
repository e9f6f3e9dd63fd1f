#include "topoctl/topoctl.h"

#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "common/errors.hpp"
#include "harness/experiment.hpp"
#include "json.hpp"

struct topoctl_network {
  topoctl::Network net;
};

struct topoctl_risk {
  topoctl::RiskMap risk;
};

struct topoctl_scenarios {
  topoctl::ScenarioSet set;
};

struct topoctl_report {
  topoctl::SolutionReport report;
  std::string status;
  double seconds = 0.0;
  std::vector<topoctl::PhIteration> trace;
};

namespace {

using namespace topoctl;

thread_local std::string last_error;

class IoError : public Error {
public:
  using Error::Error;
};

topoctl_status fail(topoctl_status code, const char* what) {
  last_error = what;
  return code;
}

// Runs f, mapping exceptions onto status codes.
template <class F>
topoctl_status guard(F&& f) {
  try {
    f();
    last_error.clear();
    return TOPOCTL_OK;
  } catch (const ParseError& e) {
    return fail(TOPOCTL_ERR_PARSE, e.what());
  } catch (const ValidationError& e) {
    return fail(TOPOCTL_ERR_VALIDATION, e.what());
  } catch (const ArgumentError& e) {
    return fail(TOPOCTL_ERR_ARGUMENT, e.what());
  } catch (const SolveError& e) {
    return fail(TOPOCTL_ERR_SOLVE, e.what());
  } catch (const IoError& e) {
    return fail(TOPOCTL_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(TOPOCTL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(TOPOCTL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(TOPOCTL_ERR_INTERNAL, "unknown error");
  }
}

void need(const void* p, const char* name) {
  if (p == nullptr) throw ArgumentError(std::string(name) + " is null");
}

char* dup(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string read_file(const char* path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(std::string("cannot open ") + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Network prepare(Network net, unsigned flags) {
  return (flags & TOPOCTL_LOAD_DEFAULT_COSTS) ? fill_default_costs(net) : net;
}

Network parse_network(const std::string& text, unsigned flags) {
  CaseOptions opts;
  opts.zero_gen_lower = (flags & TOPOCTL_LOAD_ZERO_GEN_LOWER) != 0;
  const bool matpower = text.find("mpc.") != std::string::npos;
  return prepare(matpower ? parse_case(text, opts) : parse_network_json(text), flags);
}

// Outage sets recorded in a report, as a scenario set.
ScenarioSet scenarios_of(const SolutionReport& rep) {
  ScenarioSet set;
  if (rep.kind == Kind::Deterministic) return set;
  for (const auto& s : rep.scenarios) {
    set.scenarios.push_back({s.id, s.out_lines});
    set.probabilities.push_back(s.probability);
  }
  return set;
}

}  // namespace

extern "C" {

const char* topoctl_last_error(void) { return last_error.c_str(); }

const char* topoctl_status_name(topoctl_status status) {
  switch (status) {
    case TOPOCTL_OK: return "ok";
    case TOPOCTL_ERR_ARGUMENT: return "argument error";
    case TOPOCTL_ERR_PARSE: return "parse error";
    case TOPOCTL_ERR_VALIDATION: return "validation error";
    case TOPOCTL_ERR_SOLVE: return "solve error";
    case TOPOCTL_ERR_IO: return "i/o error";
    case TOPOCTL_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* topoctl_version(void) { return "0.1.0"; }

void topoctl_string_free(char* s) { delete[] s; }

topoctl_status topoctl_network_load(const char* path, unsigned flags, topoctl_network** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new topoctl_network{parse_network(read_file(path), flags)};
  });
}

topoctl_status topoctl_network_parse(const char* text, unsigned flags, topoctl_network** out) {
  return guard([&] {
    need(text, "text");
    need(out, "out");
    *out = new topoctl_network{parse_network(text, flags)};
  });
}

void topoctl_network_free(topoctl_network* net) { delete net; }

topoctl_status topoctl_network_info(const topoctl_network* net, size_t* buses, size_t* lines, double* base_mva,
                                    double* total_demand) {
  return guard([&] {
    need(net, "network");
    if (buses) *buses = net->net.num_buses();
    if (lines) *lines = net->net.num_lines();
    if (base_mva) *base_mva = net->net.base_mva();
    if (total_demand) *total_demand = net->net.total_demand();
  });
}

topoctl_status topoctl_network_to_json(const topoctl_network* net, char** out) {
  return guard([&] {
    need(net, "network");
    need(out, "out");
    *out = dup(network_to_json(net->net));
  });
}

topoctl_status topoctl_network_big_m(const topoctl_network* net, double* out) {
  return guard([&] {
    need(net, "network");
    need(out, "out");
    *out = big_m_theta(net->net);
  });
}

topoctl_status topoctl_network_scale_loads(const topoctl_network* net, double factor, topoctl_network** out) {
  return guard([&] {
    need(net, "network");
    need(out, "out");
    *out = new topoctl_network{scale_loads(net->net, factor)};
  });
}

topoctl_status topoctl_risk_parse(const char* csv, const topoctl_network* net, topoctl_risk** out) {
  return guard([&] {
    need(csv, "csv");
    need(out, "out");
    RiskMap risk = load_risk(csv);
    if (net) risk.check_against(net->net);
    *out = new topoctl_risk{std::move(risk)};
  });
}

topoctl_status topoctl_risk_load(const char* path, const topoctl_network* net, topoctl_risk** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    RiskMap risk = load_risk(read_file(path));
    if (net) risk.check_against(net->net);
    *out = new topoctl_risk{std::move(risk)};
  });
}

void topoctl_risk_free(topoctl_risk* risk) { delete risk; }

topoctl_status topoctl_risk_threshold_for_lines(const topoctl_risk* risk, int lines, double* out) {
  return guard([&] {
    need(risk, "risk");
    need(out, "out");
    *out = threshold_for_k_lines(risk->risk, lines);
  });
}

topoctl_status topoctl_scenarios_generate(const topoctl_risk* risk, double threshold, int count, int max_outages,
                                          uint64_t seed, topoctl_scenarios** out) {
  return guard([&] {
    need(risk, "risk");
    need(out, "out");
    *out = new topoctl_scenarios{generate(risk->risk, threshold, count, max_outages, seed)};
  });
}

topoctl_status topoctl_scenarios_from_jsonl(const char* text, topoctl_scenarios** out) {
  return guard([&] {
    need(text, "text");
    need(out, "out");
    *out = new topoctl_scenarios{scenarios_from_jsonl(text)};
  });
}

void topoctl_scenarios_free(topoctl_scenarios* set) { delete set; }

topoctl_status topoctl_scenarios_to_jsonl(const topoctl_scenarios* set, char** out) {
  return guard([&] {
    need(set, "scenarios");
    need(out, "out");
    *out = dup(scenarios_to_jsonl(set->set));
  });
}

topoctl_status topoctl_scenarios_size(const topoctl_scenarios* set, size_t* out) {
  return guard([&] {
    need(set, "scenarios");
    need(out, "out");
    *out = set->set.size();
  });
}

topoctl_status topoctl_scenarios_hash(const topoctl_scenarios* set, char** out) {
  return guard([&] {
    need(set, "scenarios");
    need(out, "out");
    *out = dup(scenario_hash(set->set));
  });
}

topoctl_status topoctl_scenarios_histogram_csv(const topoctl_scenarios* set, char** out) {
  return guard([&] {
    need(set, "scenarios");
    need(out, "out");
    *out = dup(histogram_csv(concentration_histogram(set->set)));
  });
}

topoctl_status topoctl_scenarios_histogram_svg(const topoctl_scenarios* set, const char* title, char** out) {
  return guard([&] {
    need(set, "scenarios");
    need(out, "out");
    *out = dup(histogram_svg(concentration_histogram(set->set), title ? title : ""));
  });
}

topoctl_status topoctl_solve(const topoctl_network* net, const topoctl_scenarios* scenarios, const char* options,
                             topoctl_report** out) {
  return guard([&] {
    need(net, "network");
    need(out, "out");
    const SolveOptions opts = solve_options_from_json(options ? options : "");
    if (opts.kind != Kind::Deterministic) need(scenarios, "scenarios");
    const ScenarioSet empty;
    const CellOutcome cell = solve(net->net, scenarios ? scenarios->set : empty, opts);
    if (!cell.has_report) throw SolveError(to_string(opts.kind) + " solve ended " + cell.status);
    *out = new topoctl_report{cell.report, cell.status, cell.seconds, cell.ph.trace};
  });
}

void topoctl_report_free(topoctl_report* report) { delete report; }

topoctl_status topoctl_report_objective(const topoctl_report* report, double* out) {
  return guard([&] {
    need(report, "report");
    need(out, "out");
    *out = report->report.objective;
  });
}

topoctl_status topoctl_report_expected_shed_mw(const topoctl_report* report, double* out) {
  return guard([&] {
    need(report, "report");
    need(out, "out");
    *out = report->report.expected_shed_mw;
  });
}

topoctl_status topoctl_report_status(const topoctl_report* report, char** out) {
  return guard([&] {
    need(report, "report");
    need(out, "out");
    *out = dup(report->status);
  });
}

topoctl_status topoctl_report_seconds(const topoctl_report* report, double* out) {
  return guard([&] {
    need(report, "report");
    need(out, "out");
    *out = report->seconds;
  });
}

topoctl_status topoctl_report_to_json(const topoctl_report* report, char** out) {
  return guard([&] {
    need(report, "report");
    need(out, "out");
    *out = dup(report_to_json(report->report));
  });
}

topoctl_status topoctl_report_ph_trace_csv(const topoctl_report* report, char** out) {
  return guard([&] {
    need(report, "report");
    need(out, "out");
    *out = dup(trace_to_csv(report->trace));
  });
}

topoctl_status topoctl_report_from_json(const char* text, const topoctl_network* net, topoctl_report** out) {
  return guard([&] {
    need(text, "text");
    need(net, "network");
    need(out, "out");
    SolutionReport rep = report_from_json(text, net->net);
    const std::string status = rep.status;
    *out = new topoctl_report{std::move(rep), status, 0.0, {}};
  });
}

topoctl_status topoctl_report_verify(const topoctl_report* report, const topoctl_network* net,
                                     const topoctl_scenarios* scenarios, double* residual) {
  return guard([&] {
    need(report, "report");
    need(net, "network");
    need(residual, "residual");
    const ScenarioSet set = scenarios ? scenarios->set : scenarios_of(report->report);
    *residual = verify_physics(report->report, net->net, set);
  });
}

topoctl_status topoctl_experiment_run(const char* config, char** csv) {
  return guard([&] {
    need(config, "config");
    need(csv, "csv");
    *csv = dup(rows_to_csv(run_experiment(experiment_config_from_json(config))));
  });
}

topoctl_status topoctl_confidence_study(const topoctl_network* net, const topoctl_risk* risk, const char* config,
                                        char** csv, char** summary) {
  return guard([&] {
    need(net, "network");
    need(risk, "risk");
    risk->risk.check_against(net->net);
    const ConfidenceSummary s = confidence_study(net->net, risk->risk, confidence_config_from_json(config ? config : ""));
    nlohmann::json j{{"dispersed", {{"preventive_shed_mw", s.dispersed_preventive_mw},
                                    {"corrective_shed_mw", s.dispersed_corrective_mw},
                                    {"relative_gap", s.dispersed_gap}}},
                     {"concentrated", {{"preventive_shed_mw", s.concentrated_preventive_mw},
                                       {"corrective_shed_mw", s.concentrated_corrective_mw},
                                       {"relative_gap", s.concentrated_gap}}},
                     {"gap_shrinks", s.gap_shrinks}};
    if (csv) *csv = dup(confidence_to_csv(s));
    if (summary) *summary = dup(j.dump(2) + "\n");
  });
}

}  // extern "C"
