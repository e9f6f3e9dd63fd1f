#include "milp/simplex.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "common/errors.hpp"

namespace topoctl::milp {

namespace {
constexpr double kDrop = 1e-14;
constexpr double kRefactorDrift = 1e-7;  // scaled row residual that forces a fresh factorization
}

DenseSimplex::DenseSimplex(int num_structural, SimplexOptions options) : opt_(options), n_(num_structural) {
  const auto n = static_cast<std::size_t>(n_);
  cost_.assign(n, 0.0);
  lb_.assign(n, 0.0);
  ub_.assign(n, kInf);
  x_.assign(n, 0.0);
  row_of_.assign(n, -1);
  d_.assign(n, 0.0);
}

int DenseSimplex::add_row(const std::vector<Term>& terms, double lower, double upper, double weight) {
  double scale = 0.0;
  for (const Term& t : terms) {
    if (t.var < 0 || t.var >= n_) throw ArgumentError("simplex row references unknown variable");
    scale = std::max(scale, std::abs(t.coef));
  }
  if (scale == 0.0) scale = 1.0;
  scale /= weight;

  SparseRow row;
  for (const Term& t : terms) {
    row.idx.push_back(t.var);
    row.val.push_back(t.coef / scale);
  }

  const int logical = total();
  for (auto& r : tab_) r.push_back(0.0);
  cost_.push_back(0.0);
  lb_.push_back(lower / scale);
  ub_.push_back(upper / scale);
  x_.push_back(0.0);
  row_of_.push_back(m_);
  d_.push_back(0.0);

  // Express [a, -1] in the current basis, then flip the sign so the new
  // logical has a unit coefficient.
  std::vector<double> fresh(static_cast<std::size_t>(logical + 1), 0.0);
  for (std::size_t k = 0; k < row.idx.size(); ++k) fresh[static_cast<std::size_t>(row.idx[k])] += row.val[k];
  fresh[static_cast<std::size_t>(logical)] = -1.0;
  for (std::size_t k = 0; k < row.idx.size(); ++k) {
    const int j = row.idx[k];
    const int r = row_of_[static_cast<std::size_t>(j)];
    if (r < 0) continue;
    const double f = fresh[static_cast<std::size_t>(j)];
    if (f == 0.0) continue;
    const auto& tr = tab_[static_cast<std::size_t>(r)];
    for (std::size_t c = 0; c < tr.size(); ++c)
      if (tr[c] != 0.0) fresh[c] -= f * tr[c];
    fresh[static_cast<std::size_t>(j)] = 0.0;
  }
  for (double& v : fresh) v = -v;

  double value = 0.0;
  for (std::size_t c = 0; c + 1 < fresh.size(); ++c)
    if (fresh[c] != 0.0 && row_of_[c] < 0) value -= fresh[c] * x_[c];
  x_[static_cast<std::size_t>(logical)] = value;

  tab_.push_back(std::move(fresh));
  rows_.push_back(std::move(row));
  row_scale_.push_back(scale);
  basis_.push_back(logical);
  ++m_;
  return m_ - 1;
}

void DenseSimplex::set_cost(int var, double cost) {
  cost_.at(static_cast<std::size_t>(var)) = cost;
  duals_valid_ = false;
}

double DenseSimplex::nonbasic_value(int j) const {
  const auto k = static_cast<std::size_t>(j);
  if (std::isfinite(lb_[k])) return lb_[k];
  if (std::isfinite(ub_[k])) return ub_[k];
  return 0.0;
}

void DenseSimplex::set_bounds(int var, double lower, double upper) {
  if (var < 0 || var >= n_) throw ArgumentError("set_bounds: unknown variable");
  if (lower > upper) throw ArgumentError("set_bounds: empty interval");
  const auto k = static_cast<std::size_t>(var);
  const bool at_upper = !is_basic(var) && std::isfinite(ub_[k]) && x_[k] == ub_[k] && x_[k] != lb_[k];
  lb_[k] = lower;
  ub_[k] = upper;
  if (is_basic(var)) return;
  double v;
  if (at_upper && std::isfinite(upper))
    v = upper;
  else if (std::isfinite(lower))
    v = lower;
  else if (std::isfinite(upper))
    v = upper;
  else
    v = 0.0;
  const double delta = v - x_[k];
  if (delta == 0.0) return;
  for (int i = 0; i < m_; ++i) {
    const double t = tab_[static_cast<std::size_t>(i)][k];
    if (t != 0.0) x_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] -= t * delta;
  }
  x_[k] = v;
}

std::vector<double> DenseSimplex::primal() const {
  return {x_.begin(), x_.begin() + n_};
}

double DenseSimplex::objective() const {
  double obj = 0.0;
  for (int j = 0; j < n_; ++j) obj += cost_[static_cast<std::size_t>(j)] * x_[static_cast<std::size_t>(j)];
  return obj;
}

std::size_t DenseSimplex::memory_bytes() const {
  return static_cast<std::size_t>(m_) * static_cast<std::size_t>(total()) * sizeof(double);
}

void DenseSimplex::compute_duals() {
  cost_scale_ = 1.0;
  for (double c : cost_) cost_scale_ = std::max(cost_scale_, std::abs(c));
  const auto N = static_cast<std::size_t>(total());
  d_.assign(N, 0.0);
  for (std::size_t j = 0; j < N; ++j) d_[j] = cost_[j] / cost_scale_;
  for (int i = 0; i < m_; ++i) {
    const double cb = cost_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] / cost_scale_;
    if (cb == 0.0) continue;
    const auto& row = tab_[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < N; ++j)
      if (row[j] != 0.0) d_[j] -= cb * row[j];
  }
  for (int i = 0; i < m_; ++i) d_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] = 0.0;
  duals_valid_ = true;
}

void DenseSimplex::recompute_basics() {
  const auto N = static_cast<std::size_t>(total());
  std::vector<std::size_t> moved;
  for (std::size_t j = 0; j < N; ++j)
    if (row_of_[j] < 0 && x_[j] != 0.0) moved.push_back(j);
  for (int i = 0; i < m_; ++i) {
    const auto& row = tab_[static_cast<std::size_t>(i)];
    double v = 0.0;
    for (std::size_t j : moved) v -= row[j] * x_[j];
    x_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] = v;
  }
}

double DenseSimplex::max_row_drift() const {
  double worst = 0.0;
  for (int i = 0; i < m_; ++i) {
    const auto& r = rows_[static_cast<std::size_t>(i)];
    double act = 0.0, mag = 1.0;
    for (std::size_t k = 0; k < r.idx.size(); ++k) {
      const double term = r.val[k] * x_[static_cast<std::size_t>(r.idx[k])];
      act += term;
      mag += std::abs(term);
    }
    worst = std::max(worst, std::abs(act - x_[static_cast<std::size_t>(n_ + i)]) / mag);
  }
  return worst;
}

void DenseSimplex::refactor() {
  const int m = m_;
  const int N = total();
  if (m == 0) return;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, N);
  for (int i = 0; i < m; ++i) {
    const auto& r = rows_[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < r.idx.size(); ++k) A(i, r.idx[k]) = r.val[k];
    A(i, n_ + i) = -1.0;
  }
  for (int k = 0; k < m; ++k) B.col(k) = A.col(basis_[static_cast<std::size_t>(k)]);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
  Eigen::MatrixXd T = lu.solve(A);
  if (!T.allFinite()) throw SolveError("simplex basis became singular");
  for (int i = 0; i < m; ++i) {
    auto& row = tab_[static_cast<std::size_t>(i)];
    for (int j = 0; j < N; ++j) {
      const double v = T(i, j);
      row[static_cast<std::size_t>(j)] = std::abs(v) < kDrop ? 0.0 : v;
    }
  }
  for (int k = 0; k < m; ++k) {
    const auto col = static_cast<std::size_t>(basis_[static_cast<std::size_t>(k)]);
    for (int i = 0; i < m; ++i) tab_[static_cast<std::size_t>(i)][col] = (i == k) ? 1.0 : 0.0;
  }
  recompute_basics();
  duals_valid_ = false;
  since_refactor_ = 0;
}

void DenseSimplex::pivot(int row, int col) {
  auto& pr = tab_[static_cast<std::size_t>(row)];
  const auto q = static_cast<std::size_t>(col);
  const double inv = 1.0 / pr[q];
  std::vector<std::size_t> nz;
  nz.reserve(pr.size() / 4 + 1);
  for (std::size_t j = 0; j < pr.size(); ++j) {
    if (pr[j] == 0.0) continue;
    pr[j] *= inv;
    if (std::abs(pr[j]) < kDrop) {
      pr[j] = 0.0;
      continue;
    }
    nz.push_back(j);
  }
  pr[q] = 1.0;
  for (int i = 0; i < m_; ++i) {
    if (i == row) continue;
    auto& r = tab_[static_cast<std::size_t>(i)];
    const double f = r[q];
    if (f == 0.0) continue;
    for (std::size_t j : nz) r[j] -= f * pr[j];
    r[q] = 0.0;
  }
  if (duals_valid_) {
    const double f = d_[q];
    if (f != 0.0)
      for (std::size_t j : nz) d_[j] -= f * pr[j];
    d_[q] = 0.0;
  }
  const int leaving = basis_[static_cast<std::size_t>(row)];
  row_of_[static_cast<std::size_t>(leaving)] = -1;
  basis_[static_cast<std::size_t>(row)] = col;
  row_of_[q] = row;
  ++since_refactor_;
}

LpStatus DenseSimplex::solve() {
  const double ptol = opt_.primal_tol;
  const double dtol = opt_.dual_tol;
  const auto N = static_cast<std::size_t>(total());
  if (!duals_valid_) compute_duals();

  const std::int64_t start = iterations_;
  const int refactor_interval = std::max(100, m_);
  int degenerate = 0;
  int confirmations = 0;
  std::vector<double> phase1_d(N);
  std::vector<int> infeasible;
  std::vector<double> sign;

  while (true) {
    if (iterations_ - start >= opt_.max_iterations) return LpStatus::IterationLimit;
    if (since_refactor_ >= refactor_interval) {
      refactor();
      compute_duals();
    }

    infeasible.clear();
    sign.clear();
    for (int i = 0; i < m_; ++i) {
      const auto b = static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)]);
      if (x_[b] < lb_[b] - ptol) {
        infeasible.push_back(i);
        sign.push_back(-1.0);
      } else if (x_[b] > ub_[b] + ptol) {
        infeasible.push_back(i);
        sign.push_back(1.0);
      }
    }
    const bool phase1 = !infeasible.empty();
    if (phase1) {
      std::fill(phase1_d.begin(), phase1_d.end(), 0.0);
      for (std::size_t k = 0; k < infeasible.size(); ++k) {
        const auto& row = tab_[static_cast<std::size_t>(infeasible[k])];
        const double g = sign[k];
        for (std::size_t j = 0; j < N; ++j)
          if (row[j] != 0.0) phase1_d[j] -= g * row[j];
      }
    }
    const std::vector<double>& dvec = phase1 ? phase1_d : d_;
    const bool bland = degenerate >= opt_.degenerate_streak;

    // Pricing.
    int enter = -1;
    int dir = 0;
    double best = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
      if (row_of_[j] >= 0) continue;
      if (lb_[j] == ub_[j]) continue;
      const double dj = dvec[j];
      int dj_dir = 0;
      if (dj < -dtol && x_[j] < ub_[j])
        dj_dir = 1;
      else if (dj > dtol && x_[j] > lb_[j])
        dj_dir = -1;
      if (dj_dir == 0) continue;
      const double score = std::abs(dj);
      if (bland) {
        enter = static_cast<int>(j);
        dir = dj_dir;
        break;
      }
      if (score > best) {
        best = score;
        enter = static_cast<int>(j);
        dir = dj_dir;
      }
    }

    if (enter < 0) {
      // Candidate termination; confirm against accumulated roundoff first.
      if (confirmations == 0) {
        ++confirmations;
        recompute_basics();
        if (max_row_drift() > kRefactorDrift) refactor();
        compute_duals();
        continue;
      }
      return phase1 ? LpStatus::Infeasible : LpStatus::Optimal;
    }

    // Ratio test (Harris two-pass; strict minimum with lowest index under Bland).
    const auto q = static_cast<std::size_t>(enter);
    double limit = kInf;
    for (int i = 0; i < m_; ++i) {
      const double alpha = -dir * tab_[static_cast<std::size_t>(i)][q];
      if (std::abs(alpha) < opt_.pivot_tol) continue;
      const auto b = static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)]);
      double bound;
      if (phase1 && ((alpha > 0 && x_[b] > ub_[b] + ptol) || (alpha < 0 && x_[b] < lb_[b] - ptol)))
        continue;  // already infeasible on the side it moves toward
      if (alpha > 0) {
        if (phase1 && x_[b] < lb_[b] - ptol)
          bound = lb_[b];
        else if (std::isfinite(ub_[b]))
          bound = ub_[b];
        else
          continue;
        limit = std::min(limit, (bound + ptol - x_[b]) / alpha);
      } else {
        if (phase1 && x_[b] > ub_[b] + ptol)
          bound = ub_[b];
        else if (std::isfinite(lb_[b]))
          bound = lb_[b];
        else
          continue;
        limit = std::min(limit, (x_[b] - (bound - ptol)) / -alpha);
      }
    }

    int leave_row = -1;
    double step = kInf;
    double leave_bound = 0.0;
    double best_pivot = 0.0;
    int best_index = 0;
    if (std::isfinite(limit)) {
      for (int i = 0; i < m_; ++i) {
        const double alpha = -dir * tab_[static_cast<std::size_t>(i)][q];
        if (std::abs(alpha) < opt_.pivot_tol) continue;
        const auto b = static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)]);
        if (phase1 && ((alpha > 0 && x_[b] > ub_[b] + ptol) || (alpha < 0 && x_[b] < lb_[b] - ptol)))
          continue;
        double bound;
        if (alpha > 0) {
          if (phase1 && x_[b] < lb_[b] - ptol)
            bound = lb_[b];
          else if (std::isfinite(ub_[b]))
            bound = ub_[b];
          else
            continue;
        } else {
          if (phase1 && x_[b] > ub_[b] + ptol)
            bound = ub_[b];
          else if (std::isfinite(lb_[b]))
            bound = lb_[b];
          else
            continue;
        }
        const double ratio = std::max(0.0, (bound - x_[b]) / alpha);
        if (ratio > limit) continue;
        bool take;
        if (bland)
          take = leave_row < 0 || ratio < step - 1e-12 ||
                 (ratio <= step + 1e-12 && basis_[static_cast<std::size_t>(i)] < best_index);
        else
          take = std::abs(alpha) > best_pivot;
        if (take) {
          leave_row = i;
          step = ratio;
          leave_bound = bound;
          best_pivot = std::abs(alpha);
          best_index = basis_[static_cast<std::size_t>(i)];
        }
      }
    }

    const double flip = ub_[q] - lb_[q];  // inf when either side is open
    bool bound_flip = false;
    if (std::isfinite(flip) && (leave_row < 0 || flip <= step)) {
      bound_flip = true;
      step = flip;
    }
    if (leave_row < 0 && !bound_flip) {
      if (phase1) return LpStatus::Numerical;
      return LpStatus::Unbounded;
    }

    ++iterations_;
    degenerate = step < 1e-12 ? degenerate + 1 : 0;
    confirmations = 0;

    if (step != 0.0) {
      for (int i = 0; i < m_; ++i) {
        const double t = tab_[static_cast<std::size_t>(i)][q];
        if (t != 0.0) x_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(i)])] -= dir * t * step;
      }
    }
    if (bound_flip) {
      x_[q] = dir > 0 ? ub_[q] : lb_[q];
      continue;
    }
    x_[q] += dir * step;
    const auto leaving = static_cast<std::size_t>(basis_[static_cast<std::size_t>(leave_row)]);
    x_[leaving] = leave_bound;
    pivot(leave_row, enter);
  }
}

}  // namespace topoctl::milp
