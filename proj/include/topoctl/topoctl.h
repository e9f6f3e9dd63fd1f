#ifndef TOPOCTL_TOPOCTL_H
#define TOPOCTL_TOPOCTL_H

#include <stddef.h>
#include <stdint.h>

#if defined(TOPOCTL_BUILDING)
#define TOPOCTL_API __attribute__((visibility("default")))
#else
#define TOPOCTL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum topoctl_status {
  TOPOCTL_OK = 0,
  TOPOCTL_ERR_ARGUMENT = 1,   /* bad option, unknown key, null pointer */
  TOPOCTL_ERR_PARSE = 2,      /* malformed case, CSV, JSON */
  TOPOCTL_ERR_VALIDATION = 3, /* data violates a network invariant */
  TOPOCTL_ERR_SOLVE = 4,      /* infeasible or failed solve */
  TOPOCTL_ERR_IO = 5,
  TOPOCTL_ERR_INTERNAL = 6
} topoctl_status;

typedef struct topoctl_network topoctl_network;
typedef struct topoctl_risk topoctl_risk;
typedef struct topoctl_scenarios topoctl_scenarios;
typedef struct topoctl_report topoctl_report;

/* Message of the last failed call on this thread; "" after a success. */
TOPOCTL_API const char* topoctl_last_error(void);
TOPOCTL_API const char* topoctl_status_name(topoctl_status status);
TOPOCTL_API const char* topoctl_version(void);
/* Frees strings returned through char** out-parameters. */
TOPOCTL_API void topoctl_string_free(char* s);

/* ---- network ---- */

#define TOPOCTL_LOAD_ZERO_GEN_LOWER 1u
#define TOPOCTL_LOAD_DEFAULT_COSTS 2u /* fill ramp cost and VoLL when absent */

/* MATPOWER text or native JSON, picked by content. */
TOPOCTL_API topoctl_status topoctl_network_load(const char* path, unsigned flags, topoctl_network** out);
TOPOCTL_API topoctl_status topoctl_network_parse(const char* text, unsigned flags, topoctl_network** out);
TOPOCTL_API void topoctl_network_free(topoctl_network* net);
TOPOCTL_API topoctl_status topoctl_network_info(const topoctl_network* net, size_t* buses, size_t* lines,
                                                double* base_mva, double* total_demand);
TOPOCTL_API topoctl_status topoctl_network_to_json(const topoctl_network* net, char** out);
TOPOCTL_API topoctl_status topoctl_network_big_m(const topoctl_network* net, double* out);
TOPOCTL_API topoctl_status topoctl_network_scale_loads(const topoctl_network* net, double factor,
                                                       topoctl_network** out);

/* ---- risk ---- */

/* CSV rows "from,to,circuit,risk"; checked against net when it is non-null. */
TOPOCTL_API topoctl_status topoctl_risk_parse(const char* csv, const topoctl_network* net, topoctl_risk** out);
TOPOCTL_API topoctl_status topoctl_risk_load(const char* path, const topoctl_network* net, topoctl_risk** out);
TOPOCTL_API void topoctl_risk_free(topoctl_risk* risk);
TOPOCTL_API topoctl_status topoctl_risk_threshold_for_lines(const topoctl_risk* risk, int lines, double* out);

/* ---- scenarios ---- */

TOPOCTL_API topoctl_status topoctl_scenarios_generate(const topoctl_risk* risk, double threshold, int count,
                                                      int max_outages, uint64_t seed, topoctl_scenarios** out);
TOPOCTL_API topoctl_status topoctl_scenarios_from_jsonl(const char* text, topoctl_scenarios** out);
TOPOCTL_API void topoctl_scenarios_free(topoctl_scenarios* set);
TOPOCTL_API topoctl_status topoctl_scenarios_to_jsonl(const topoctl_scenarios* set, char** out);
TOPOCTL_API topoctl_status topoctl_scenarios_size(const topoctl_scenarios* set, size_t* out);
TOPOCTL_API topoctl_status topoctl_scenarios_hash(const topoctl_scenarios* set, char** out);
TOPOCTL_API topoctl_status topoctl_scenarios_histogram_csv(const topoctl_scenarios* set, char** out);
TOPOCTL_API topoctl_status topoctl_scenarios_histogram_svg(const topoctl_scenarios* set, const char* title,
                                                           char** out);

/* ---- solve ---- */

/* options: JSON object with formulation ("deterministic", "preventive",
 * "corrective"), method ("extensive", "ph"), budget, load_scaling, mode
 * ("serial", "parallel"), threads, ph {primal_tol, dual_tol, max_iterations,
 * alpha, gamma, stall, fixed_penalty, slam_after}, solver {gap, node_limit, time_limit,
 * quad_segments}. NULL or "" selects the defaults. scenarios may be NULL for
 * the deterministic formulation. A solve that ends without a usable point
 * returns TOPOCTL_ERR_SOLVE. */
TOPOCTL_API topoctl_status topoctl_solve(const topoctl_network* net, const topoctl_scenarios* scenarios,
                                         const char* options, topoctl_report** out);
TOPOCTL_API void topoctl_report_free(topoctl_report* report);
TOPOCTL_API topoctl_status topoctl_report_objective(const topoctl_report* report, double* out);
TOPOCTL_API topoctl_status topoctl_report_expected_shed_mw(const topoctl_report* report, double* out);
/* "optimal", "iteration-limit", "node-limit", ... */
TOPOCTL_API topoctl_status topoctl_report_status(const topoctl_report* report, char** out);
TOPOCTL_API topoctl_status topoctl_report_seconds(const topoctl_report* report, double* out);
TOPOCTL_API topoctl_status topoctl_report_to_json(const topoctl_report* report, char** out);
/* Per-iteration PH trace as CSV; header only for extensive-form solves. */
TOPOCTL_API topoctl_status topoctl_report_ph_trace_csv(const topoctl_report* report, char** out);
/* Reads topoctl_report_to_json output back against the network it was solved on. */
TOPOCTL_API topoctl_status topoctl_report_from_json(const char* text, const topoctl_network* net,
                                                    topoctl_report** out);
/* Largest physics residual of the report. scenarios may be NULL: the outage
 * sets recorded in the report are used. */
TOPOCTL_API topoctl_status topoctl_report_verify(const topoctl_report* report, const topoctl_network* net,
                                                 const topoctl_scenarios* scenarios, double* residual);

/* ---- studies ---- */

/* config: experiment JSON (case, risk, scenario_counts, scalings, thresholds,
 * seeds, budget, max_outages, methods, modes, formulations, threads, ph,
 * solver). Writes the result table as CSV. */
TOPOCTL_API topoctl_status topoctl_experiment_run(const char* config, char** csv);
/* config: JSON (scenarios, max_outages, budget, concentrated_lines, scaling,
 * seeds, method, threads, ph, solver). Writes per-seed rows as CSV and a
 * JSON summary with the mean sheds and both relative gaps. */
TOPOCTL_API topoctl_status topoctl_confidence_study(const topoctl_network* net, const topoctl_risk* risk,
                                                    const char* config, char** csv, char** summary);

#ifdef __cplusplus
}
#endif

#endif
