#include "milp/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <queue>

#include "common/errors.hpp"

namespace topoctl::milp {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::IterationLimit: return "iteration-limit";
    case SolveStatus::NumericalError: return "numerical-error";
  }
  return "unknown";
}

namespace {

constexpr double kCutWeight = 1e4;
constexpr double kCoarseResolution = 1e-3;

// The epigraph variable bounds coef * (x - center)^2; the remaining linear
// and constant parts of coef * x^2 go into the LP objective. Centering at the
// separable minimizer keeps the epigraph small near the optimum.
struct QuadTerm {
  int var;
  int epigraph;
  double coef;
  double center;
};

struct CutRow {
  std::vector<Term> terms;
  double lower;
};

struct LpState {
  DenseSimplex lp;
  std::size_t cuts_applied = 0;
};

struct BoundChange {
  int var;
  double lower;
  double upper;
};

struct Node {
  double bound;
  int depth;
  std::int64_t id;
  std::vector<BoundChange> changes;
  std::shared_ptr<const LpState> warm;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

// Wraps one model's LP relaxation plus the shared tangent-cut pool.
class Relaxation {
public:
  Relaxation(const Model& model, const SolverConfig& cfg) : model_(model), cfg_(cfg) {
    const int n = static_cast<int>(model.num_variables());
    int extra = 0;
    for (double q : model.quadratic())
      if (q > 0.0) ++extra;
    DenseSimplex lp(n + extra, cfg.lp);
    for (int j = 0; j < n; ++j) {
      const auto& v = model.variables()[static_cast<std::size_t>(j)];
      lp.set_bounds(j, v.lower, v.upper);
      lp.set_cost(j, model.linear()[static_cast<std::size_t>(j)]);
    }
    int next = n;
    for (int j = 0; j < n; ++j) {
      const double q = model.quadratic()[static_cast<std::size_t>(j)];
      if (q <= 0.0) continue;
      const auto& v = model.variables()[static_cast<std::size_t>(j)];
      if (!std::isfinite(v.lower) || !std::isfinite(v.upper))
        throw ArgumentError("quadratic objective term on " + v.name + " requires finite bounds");
      const int epi = next++;
      const double lin = model.linear()[static_cast<std::size_t>(j)];
      const double c = std::clamp(-lin / (2.0 * q), v.lower, v.upper);
      lp.set_cost(j, lin + 2.0 * q * c);
      constant_ -= q * c * c;
      lp.set_bounds(epi, 0.0, kInf);
      lp.set_cost(epi, 1.0);
      quads_.push_back({j, epi, q, c});
      const int segs = std::max(1, cfg.quad_segments);
      for (int k = 0; k <= segs; ++k) {
        const double point = v.lower + (v.upper - v.lower) * k / segs;
        pool_.push_back(tangent(quads_.back(), point));
      }
      pool_.push_back(tangent(quads_.back(), c));
    }
    for (const auto& c : model.constraints()) {
      double lo = -kInf, hi = kInf;
      if (c.sense != Sense::LessEqual) lo = c.rhs;
      if (c.sense != Sense::GreaterEqual) hi = c.rhs;
      lp.add_row(c.terms, lo, hi);
    }
    root_ = std::make_shared<LpState>(LpState{std::move(lp), 0});
  }

  std::shared_ptr<LpState> fresh() const { return std::make_shared<LpState>(*root_); }

  // Solves the LP in `state`, refining the quadratic under-estimate. Node
  // relaxations only need a valid bound, so they stop at a coarser resolution
  // than the polishing solves that produce incumbents.
  LpStatus solve(LpState& state, bool fine) {
    const double res = fine ? cfg_.quad_resolution : std::max(cfg_.quad_resolution, kCoarseResolution);
    for (int round = 0;; ++round) {
      for (; state.cuts_applied < pool_.size(); ++state.cuts_applied) {
        const CutRow& cut = pool_[state.cuts_applied];
        state.lp.add_row(cut.terms, cut.lower, kInf, kCutWeight);
      }
      const LpStatus status = state.lp.solve();
      if (status != LpStatus::Optimal || quads_.empty() || !cfg_.quad_refine || round >= cfg_.quad_max_rounds)
        return status;
      bool added = false;
      for (const QuadTerm& qt : quads_) {
        const double x = state.lp.value(qt.var);
        const double dx = x - qt.center;
        const double under = qt.coef * dx * dx - state.lp.value(qt.epigraph);
        if (under > qt.coef * res * res + 1e-14 * std::max(1.0, qt.coef * dx * dx)) {
          pool_.push_back(tangent(qt, x));
          added = true;
        }
      }
      if (!added) return status;
    }
  }

  double lp_objective(const LpState& state) const { return state.lp.objective() + model_.constant() + constant_; }

private:
  static CutRow tangent(const QuadTerm& qt, double point) {
    // t >= q d^2 + 2 q d (x - point) with d = point - center
    const double d = point - qt.center;
    return {{{qt.epigraph, 1.0}, {qt.var, -2.0 * qt.coef * d}}, qt.coef * d * d - 2.0 * qt.coef * d * point};
  }

  const Model& model_;
  const SolverConfig& cfg_;
  std::vector<QuadTerm> quads_;
  std::vector<CutRow> pool_;
  double constant_ = 0.0;
  std::shared_ptr<LpState> root_;
};

int most_fractional(const Model& model, const std::vector<double>& x, double tol) {
  int best = -1;
  double best_score = tol;
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    if (!model.variables()[j].integer) continue;
    const double frac = std::min(x[j] - std::floor(x[j]), std::ceil(x[j]) - x[j]);
    if (frac > best_score) {
      best_score = frac;
      best = static_cast<int>(j);
    }
  }
  return best;
}

}  // namespace

Solution BranchAndBound::solve(const Model& model, const SolverConfig& cfg) const {
  using clock = std::chrono::steady_clock;
  const auto started = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - started).count(); };

  Solution result;
  Relaxation relax(model, cfg);
  const auto n = model.num_variables();

  bool have_incumbent = false;
  double incumbent_obj = kInf;
  std::vector<double> incumbent;
  bool numerical_trouble = false;
  std::int64_t lp_iters = 0;

  auto apply = [](LpState& st, const std::vector<BoundChange>& changes) {
    for (const auto& c : changes) st.lp.set_bounds(c.var, c.lower, c.upper);
  };

  // Fixes integers at their rounded values and re-solves so the continuous
  // part is consistent with exact integers. Returns false if that LP fails.
  auto polish = [&](const LpState& from, const std::vector<double>& x) -> bool {
    auto st = std::make_shared<LpState>(from);
    for (std::size_t j = 0; j < n; ++j) {
      if (!model.variables()[j].integer) continue;
      const auto& v = model.variables()[j];
      const double r = std::clamp(std::round(x[j]), v.lower, v.upper);
      st->lp.set_bounds(static_cast<int>(j), r, r);
    }
    const std::int64_t before = st->lp.iterations();
    const LpStatus s = relax.solve(*st, true);
    lp_iters += st->lp.iterations() - before;
    if (s != LpStatus::Optimal) return false;
    std::vector<double> values = st->lp.primal();
    values.resize(n);
    for (std::size_t j = 0; j < n; ++j)
      if (model.variables()[j].integer) values[j] = std::round(values[j]);
    const double obj = model.objective_value(values);
    if (obj < incumbent_obj) {
      incumbent_obj = obj;
      incumbent = std::move(values);
      have_incumbent = true;
    }
    return true;
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  std::int64_t next_id = 0;
  open.push(Node{-kInf, 0, next_id++, {}, nullptr});
  std::shared_ptr<const LpState> root_solved;
  bool limit_hit = false;
  bool root = true;

  while (!open.empty()) {
    if (result.stats.nodes >= cfg.node_limit || (cfg.time_limit > 0 && elapsed() > cfg.time_limit)) {
      limit_hit = true;
      break;
    }
    Node node = open.top();
    open.pop();
    const double tol = std::max(cfg.absolute_gap, cfg.gap * std::abs(incumbent_obj));
    if (have_incumbent && node.bound >= incumbent_obj - tol) continue;

    ++result.stats.nodes;
    std::shared_ptr<LpState> state = node.warm      ? std::make_shared<LpState>(*node.warm)
                                     : root_solved ? std::make_shared<LpState>(*root_solved)
                                                   : relax.fresh();
    apply(*state, node.changes);
    const std::int64_t before = state->lp.iterations();
    const LpStatus status = relax.solve(*state, model.num_integers() == 0);
    lp_iters += state->lp.iterations() - before;

    if (status == LpStatus::Infeasible) {
      if (root) {
        result.status = SolveStatus::Infeasible;
        result.stats.lp_iterations = lp_iters;
        result.stats.seconds = elapsed();
        return result;
      }
      continue;
    }
    if (status == LpStatus::Unbounded) {
      result.status = SolveStatus::Unbounded;
      result.stats.lp_iterations = lp_iters;
      result.stats.seconds = elapsed();
      return result;
    }
    if (status != LpStatus::Optimal) {
      numerical_trouble = true;
      continue;
    }

    const double bound = relax.lp_objective(*state);
    if (root) {
      root_solved = state;
      root = false;
    }
    const double tol2 = std::max(cfg.absolute_gap, cfg.gap * std::abs(incumbent_obj));
    if (have_incumbent && bound >= incumbent_obj - tol2) continue;

    std::vector<double> x = state->lp.primal();
    x.resize(n);
    const int branch = most_fractional(model, x, cfg.integrality_tol);
    if (branch < 0) {
      if (!polish(*state, x)) numerical_trouble = true;
      continue;
    }
    if (node.depth == 0) polish(*state, x);  // rounding heuristic at the root

    const auto& v = model.variables()[static_cast<std::size_t>(branch)];
    const double value = x[static_cast<std::size_t>(branch)];
    std::shared_ptr<const LpState> warm = state;
    if (static_cast<double>(open.size() + 2) * static_cast<double>(state->lp.memory_bytes()) >
        static_cast<double>(cfg.warm_start_memory))
      warm = nullptr;

    Node down{bound, node.depth + 1, next_id++, node.changes, warm};
    down.changes.push_back({branch, v.lower, std::floor(value)});
    for (const auto& c : node.changes)
      if (c.var == branch) down.changes.back().lower = std::max(down.changes.back().lower, c.lower);
    Node up{bound, node.depth + 1, next_id++, node.changes, warm};
    up.changes.push_back({branch, std::ceil(value), v.upper});
    for (const auto& c : node.changes)
      if (c.var == branch) up.changes.back().upper = std::min(up.changes.back().upper, c.upper);
    open.push(std::move(down));
    open.push(std::move(up));
  }

  result.stats.lp_iterations = lp_iters;
  if (have_incumbent) {
    double best_open = incumbent_obj;
    if (limit_hit && !open.empty()) best_open = std::min(best_open, open.top().bound);
    result.values = incumbent;
    result.objective = incumbent_obj;
    result.best_bound = best_open;
    if (limit_hit)
      result.status = SolveStatus::IterationLimit;
    else if (numerical_trouble)
      result.status = SolveStatus::NumericalError;
    else
      result.status = SolveStatus::Optimal;
    if (verify_solution(model, result.values) > 1e-6 || integrality_violation(model, result.values) > 1e-6)
      result.status = SolveStatus::NumericalError;
  } else {
    result.status = limit_hit ? SolveStatus::IterationLimit
                    : numerical_trouble ? SolveStatus::NumericalError
                                        : SolveStatus::Infeasible;
  }
  result.stats.seconds = elapsed();
  return result;
}

Solution solve(const Model& model, const SolverConfig& config) {
  return BranchAndBound{}.solve(model, config);
}

}  // namespace topoctl::milp
