#include "ph/ph.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include "common/errors.hpp"

namespace topoctl {

std::vector<double> aggregate(const std::vector<std::vector<double>>& x, const std::vector<double>& probabilities) {
  if (x.empty()) return {};
  // Summed as offsets from the first scenario so that agreeing iterates
  // aggregate to exactly their common value.
  std::vector<double> xbar = x.front();
  for (std::size_t j = 0; j < xbar.size(); ++j) {
    double d = 0.0;
    for (std::size_t s = 1; s < x.size(); ++s) d += probabilities[s] * (x[s][j] - x[0][j]);
    xbar[j] += d;
  }
  return xbar;
}

void update_multipliers(std::vector<std::vector<double>>& rho, const std::vector<std::vector<double>>& x,
                        const std::vector<double>& xbar, const std::vector<double>& penalty,
                        const std::vector<double>& probabilities) {
  for (std::size_t s = 0; s < rho.size(); ++s)
    for (std::size_t j = 0; j < xbar.size(); ++j) rho[s][j] += penalty[j] * (x[s][j] - xbar[j]);
  // Remove the rounding residue of sum_s pi_s rho_s.
  for (std::size_t j = 0; j < xbar.size(); ++j) {
    double w = 0.0;
    for (std::size_t s = 0; s < rho.size(); ++s) w += probabilities[s] * rho[s][j];
    for (std::size_t s = 0; s < rho.size(); ++s) rho[s][j] -= w;
  }
}

std::vector<double> initial_penalty(const std::vector<double>& cost, const std::vector<double>& lower,
                                    const std::vector<double>& upper, double alpha, double min_penalty) {
  std::vector<double> r(cost.size());
  for (std::size_t j = 0; j < cost.size(); ++j)
    r[j] = std::max(min_penalty, alpha * std::abs(cost[j]) / (upper[j] - lower[j] + 1.0));
  return r;
}

bool update_penalty(std::vector<double>& penalty, double previous_gap, double current_gap, const PhConfig& cfg) {
  if (cfg.fixed_penalty || !std::isfinite(previous_gap)) return false;
  if (current_gap < (1.0 - cfg.stall) * previous_gap) return false;
  for (double& r : penalty) r *= cfg.gamma;
  return true;
}

double primal_gap(const std::vector<double>& xbar, const std::vector<double>& previous) {
  double g = 0.0;
  for (std::size_t j = 0; j < xbar.size(); ++j) g += (xbar[j] - previous[j]) * (xbar[j] - previous[j]);
  return g;
}

double dual_gap(const std::vector<std::vector<double>>& x, const std::vector<double>& xbar,
                const std::vector<double>& probabilities) {
  double g = 0.0;
  for (std::size_t s = 0; s < x.size(); ++s) {
    double d = 0.0;
    for (std::size_t j = 0; j < xbar.size(); ++j) d += (x[s][j] - xbar[j]) * (x[s][j] - xbar[j]);
    g += probabilities[s] * d;
  }
  return g;
}

bool converged(int k, double primal, double dual, const PhConfig& cfg) {
  return k >= 1 && primal <= cfg.primal_tol && dual <= cfg.dual_tol;
}

namespace {

constexpr std::size_t kMaxCandidates = 8;

// Runs fn(0..n-1) on up to `threads` workers. Results must be written to
// per-index slots; the first failure by index is rethrown.
template <class F>
void for_each_scenario(std::size_t n, int threads, F&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t count = std::min<std::size_t>(n, static_cast<std::size_t>(threads));
  for (std::size_t t = 0; t < count; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

int worker_count(const PhConfig& cfg) {
  if (cfg.mode == PhMode::Serial) return 1;
  if (cfg.threads > 0) return cfg.threads;
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

std::vector<double> first_stage_values(const BuiltModel& built, const milp::Solution& sol) {
  std::vector<double> x;
  for (int v : built.layout.first_stage()) {
    double val = sol.values[static_cast<std::size_t>(v)];
    if (built.model.variables()[static_cast<std::size_t>(v)].integer) val = std::round(val);
    x.push_back(val);
  }
  return x;
}

milp::Solution solve_or_throw(const BuiltModel& built, const milp::SolverConfig& solver, int scenario_id,
                              const char* what) {
  milp::Solution sol = milp::solve(built.model, solver);
  if (!sol.optimal())
    throw SolveError(std::string(what) + " for scenario " + std::to_string(scenario_id) + " ended " +
                     milp::to_string(sol.status));
  return sol;
}

// Fixes every binary on which the scenarios still disagree to its vote,
// highest share first, keeping the ones within the action budget. Returns
// whether anything was fixed.
bool slam(std::vector<double>& fixed, const std::vector<std::vector<double>>& x, const std::vector<double>& xbar,
          const std::vector<bool>& integer, int budget) {
  int used = 0;
  std::vector<std::size_t> open;
  for (std::size_t j = 0; j < xbar.size(); ++j) {
    if (!integer[j]) continue;
    double lo = x.front()[j], hi = lo;
    for (const auto& xs : x) {
      lo = std::min(lo, xs[j]);
      hi = std::max(hi, xs[j]);
    }
    if (!std::isnan(fixed[j]) || hi - lo < 0.5) {
      if (lo > 0.5 || fixed[j] == 1.0) ++used;
      continue;
    }
    open.push_back(j);
  }
  std::stable_sort(open.begin(), open.end(), [&](std::size_t a, std::size_t b) { return xbar[a] > xbar[b]; });
  for (std::size_t j : open) {
    fixed[j] = xbar[j] > 0.5 + 1e-12 && used < budget ? 1.0 : 0.0;
    if (fixed[j] == 1.0) ++used;
  }
  return !open.empty();
}

}  // namespace

SolutionReport evaluate_first_stage(const Network& net, const ScenarioSet& scenarios, const FormulationConfig& fcfg,
                                    const std::vector<double>& first_stage, const milp::SolverConfig& solver,
                                    int threads) {
  if (scenarios.empty()) throw ArgumentError("empty scenario set");
  const std::size_t n = scenarios.size();
  std::vector<SolutionReport> parts(n);
  for_each_scenario(n, threads, [&](std::size_t s) {
    BuiltModel built = build_scenario(net, scenarios, s, fcfg);
    const std::vector<int> vars = built.layout.first_stage();
    if (vars.size() != first_stage.size())
      throw ArgumentError("first-stage vector has " + std::to_string(first_stage.size()) + " entries, expected " +
                          std::to_string(vars.size()));
    for (std::size_t k = 0; k < vars.size(); ++k) {
      const auto& v = built.model.variables()[static_cast<std::size_t>(vars[k])];
      double val = std::clamp(first_stage[k], v.lower, v.upper);
      if (v.integer) val = std::round(val);
      built.model.set_bounds(vars[k], val, val);
    }
    const milp::Solution sol = solve_or_throw(built, solver, scenarios.scenarios[s].id, "fixed first stage recourse");
    parts[s] = extract_report(built, sol, net, scenarios);
  });

  SolutionReport rep = parts.front();
  rep.scenarios.clear();
  for (std::size_t s = 0; s < n; ++s) {
    ScenarioReport sr = parts[s].scenarios.front();
    sr.probability = scenarios.probabilities[s];
    rep.scenarios.push_back(std::move(sr));
  }
  recompute_costs(rep, net);
  rep.max_residual = verify_physics(rep, net, scenarios);
  return rep;
}

PhResult ph_solve(const Network& net, const ScenarioSet& scenarios, const FormulationConfig& fcfg,
                  const PhConfig& cfg) {
  if (fcfg.kind == Kind::Deterministic) throw ArgumentError("progressive hedging needs a two-stage formulation");
  if (scenarios.empty()) throw ArgumentError("progressive hedging needs at least one scenario");
  if (cfg.primal_tol <= 0.0 || cfg.dual_tol <= 0.0) throw ArgumentError("tolerances must be positive");
  if (cfg.gamma < 1.0) throw ArgumentError("penalty growth factor must be at least 1");

  using clock = std::chrono::steady_clock;
  const auto started = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - started).count(); };
  const int threads = worker_count(cfg);
  const std::size_t n = scenarios.size();

  // Variable metadata of the first stage, identical across scenarios.
  const BuiltModel probe = build_scenario(net, scenarios, 0, fcfg);
  const std::vector<int> vars = probe.layout.first_stage();
  const std::size_t dim = vars.size();
  std::vector<double> cost(dim), lower(dim), upper(dim);
  std::vector<bool> integer(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    const auto& v = probe.model.variables()[static_cast<std::size_t>(vars[j])];
    cost[j] = probe.model.linear()[static_cast<std::size_t>(vars[j])];
    lower[j] = v.lower;
    upper[j] = v.upper;
    integer[j] = v.integer;
  }

  PhState st;
  st.probabilities = scenarios.probabilities;
  st.x.assign(n, std::vector<double>(dim, 0.0));
  st.rho.assign(n, std::vector<double>(dim, 0.0));

  // k = 0: scenario optima without penalty terms.
  for_each_scenario(n, threads, [&](std::size_t s) {
    const BuiltModel built = build_scenario(net, scenarios, s, fcfg);
    st.x[s] = first_stage_values(built, solve_or_throw(built, cfg.solver, scenarios.scenarios[s].id, "initial solve"));
  });
  st.xbar = aggregate(st.x, st.probabilities);
  st.penalty = initial_penalty(cost, lower, upper, cfg.alpha, cfg.min_penalty);
  update_multipliers(st.rho, st.x, st.xbar, st.penalty, st.probabilities);

  PhResult result;
  auto record = [&](double primal, double dual) {
    PhIteration it;
    it.iteration = st.k;
    it.primal_gap = primal;
    it.dual_gap = dual;
    double sum = 0.0;
    for (double r : st.penalty) sum += r;
    it.penalty_mean = dim ? sum / static_cast<double>(dim) : 0.0;
    it.seconds = elapsed();
    for (std::size_t j = 0; j < dim; ++j) {
      double w = 0.0;
      for (std::size_t s = 0; s < n; ++s) w += st.probabilities[s] * st.rho[s][j];
      it.multiplier_sum = std::max(it.multiplier_sum, std::abs(w));
    }
    st.history.push_back(it);
    result.xbar_history.push_back(st.xbar);
  };
  record(milp::kInf, dual_gap(st.x, st.xbar, st.probabilities));

  std::vector<double> fixed(dim, std::numeric_limits<double>::quiet_NaN());
  int quiet = 0;
  double best_dual = milp::kInf;
  result.terminated_by = "iteration-limit";
  for (st.k = 1; st.k <= cfg.max_iterations; ++st.k) {
    const std::vector<double> anchor = st.xbar;
    for_each_scenario(n, threads, [&](std::size_t s) {
      BuiltModel built = build_ph_subproblem(net, scenarios, s, fcfg, anchor, st.rho[s], st.penalty);
      for (std::size_t j = 0; j < dim; ++j)
        if (!std::isnan(fixed[j])) built.model.set_bounds(vars[j], fixed[j], fixed[j]);
      st.x[s] = first_stage_values(built, solve_or_throw(built, cfg.solver, scenarios.scenarios[s].id, "subproblem"));
    });
    st.xbar = aggregate(st.x, st.probabilities);
    const double primal = primal_gap(st.xbar, anchor);
    const double dual = dual_gap(st.x, st.xbar, st.probabilities);
    if (converged(st.k, primal, dual, cfg)) {
      record(primal, dual);
      result.terminated_by = "tolerance";
      break;
    }
    update_multipliers(st.rho, st.x, st.xbar, st.penalty, st.probabilities);
    update_penalty(st.penalty, st.history.back().primal_gap, primal, cfg);
    record(primal, dual);
    if (dual < (1.0 - cfg.stall) * best_dual) {
      best_dual = dual;
      quiet = 0;
    } else if (cfg.slam_after > 0 && ++quiet >= cfg.slam_after) {
      std::vector<double> share(dim, 0.0);
      const std::size_t h = result.xbar_history.size();
      for (std::size_t k = h - static_cast<std::size_t>(cfg.slam_after); k < h; ++k)
        for (std::size_t j = 0; j < dim; ++j) share[j] += result.xbar_history[k][j] / cfg.slam_after;
      if (slam(fixed, st.x, share, integer, fcfg.budget)) ++result.slammed;
      best_dual = milp::kInf;
      quiet = 0;
    }
  }
  result.iterations = std::min(st.k, cfg.max_iterations);

  // Finalization: binaries by probability-weighted vote (ties keep the
  // initial status, i.e. no action), capped at the budget by vote share;
  // continuous entries at the average.
  result.first_stage = st.xbar;
  std::vector<std::size_t> chosen;
  for (std::size_t j = 0; j < dim; ++j) {
    if (!integer[j]) continue;
    const double share = st.xbar[j];
    result.first_stage[j] = share > 0.5 + 1e-12 ? 1.0 : 0.0;
    if (result.first_stage[j] == 1.0) chosen.push_back(j);
  }
  if (static_cast<int>(chosen.size()) > fcfg.budget) {
    std::stable_sort(chosen.begin(), chosen.end(),
                     [&](std::size_t a, std::size_t b) { return st.xbar[a] > st.xbar[b]; });
    for (std::size_t k = static_cast<std::size_t>(fcfg.budget); k < chosen.size(); ++k)
      result.first_stage[chosen[k]] = 0.0;
  }
  // Without binary consensus the vote is only one candidate; the distinct
  // final scenario iterates (continuous part still at the average) compete
  // with it and the cheapest finalized point wins, the vote on ties.
  std::vector<std::vector<double>> candidates{result.first_stage};
  for (std::size_t s = 0; s < n && candidates.size() < kMaxCandidates; ++s) {
    std::vector<double> c = st.xbar;
    for (std::size_t j = 0; j < dim; ++j)
      if (integer[j]) c[j] = st.x[s][j];
    if (std::find(candidates.begin(), candidates.end(), c) == candidates.end()) candidates.push_back(std::move(c));
  }
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    SolutionReport rep = evaluate_first_stage(net, scenarios, fcfg, candidates[c], cfg.solver, threads);
    if (c == 0 || rep.objective < result.objective) {
      result.objective = rep.objective;
      result.report = std::move(rep);
      result.first_stage = candidates[c];
    }
  }
  for (std::size_t j = 0; j < dim; ++j)
    if (integer[j]) result.binaries.push_back(static_cast<int>(result.first_stage[j]));
  result.trace = st.history;
  return result;
}

std::string trace_to_csv(const std::vector<PhIteration>& trace) {
  std::ostringstream os;
  os.precision(12);
  os << "iteration,primal_gap,dual_gap,penalty_mean,seconds\n";
  for (const auto& it : trace) {
    os << it.iteration << ',';
    if (std::isfinite(it.primal_gap))
      os << it.primal_gap;
    else
      os << "inf";
    os << ',' << it.dual_gap << ',' << it.penalty_mean << ',' << it.seconds << '\n';
  }
  return os.str();
}

}  // namespace topoctl
