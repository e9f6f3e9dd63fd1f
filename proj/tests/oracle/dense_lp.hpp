#pragma once
// Textbook two-phase tableau simplex with Bland's rule. Slow and simple on
// purpose: it shares no code with the library's solver and serves as the
// reference for small LPs in the tests.

#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpRow {
  std::vector<std::pair<int, double>> terms;
  char sense = '=';  // '<', '>', '='
  double rhs = 0.0;
};

struct Lp {
  std::vector<double> cost, lower, upper;
  std::vector<LpRow> rows;

  int add_var(double lo, double hi, double c) {
    lower.push_back(lo);
    upper.push_back(hi);
    cost.push_back(c);
    return static_cast<int>(cost.size()) - 1;
  }
  void add_row(std::vector<std::pair<int, double>> terms, char sense, double rhs) {
    rows.push_back({std::move(terms), sense, rhs});
  }
};

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
};

namespace detail {

// min c.y, A y = b, y >= 0 with b >= 0. Returns status, fills y.
inline LpStatus standard_simplex(std::vector<std::vector<double>> A, std::vector<double> b,
                                 const std::vector<double>& c, std::vector<double>& y) {
  const std::size_t m = A.size(), n = c.size();
  const double eps = 1e-9;
  // tableau columns: n structural, m artificial, rhs
  const std::size_t w = n + m + 1;
  std::vector<std::vector<double>> T(m + 1, std::vector<double>(w, 0.0));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) T[i][j] = A[i][j];
    T[i][n + i] = 1.0;
    T[i][w - 1] = b[i];
    basis[i] = n + i;
  }

  auto pivot = [&](std::size_t r, std::size_t col) {
    const double p = T[r][col];
    for (double& v : T[r]) v /= p;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == r || T[i][col] == 0.0) continue;
      const double f = T[i][col];
      for (std::size_t j = 0; j < w; ++j) T[i][j] -= f * T[r][j];
    }
    basis[r] = col;
  };

  // objective row holds reduced costs; cols allowed: [0, limit)
  auto run = [&](std::size_t limit) -> bool {
    for (;;) {
      std::size_t enter = w;
      for (std::size_t j = 0; j < limit; ++j)
        if (T[m][j] < -eps) {
          enter = j;
          break;
        }
      if (enter == w) return true;
      std::size_t leave = m;
      double best = kInf;
      for (std::size_t i = 0; i < m; ++i) {
        if (T[i][enter] <= eps) continue;
        const double ratio = T[i][w - 1] / T[i][enter];
        if (ratio < best - 1e-12 || (std::abs(ratio - best) <= 1e-12 && leave < m && basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave == m) return false;
      pivot(leave, enter);
    }
  };

  // phase 1: minimize the sum of artificials
  for (std::size_t j = 0; j < w; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += T[i][j];
    T[m][j] = (j >= n && j < n + m) ? 0.0 : -s;
  }
  run(n + m);
  if (-T[m][w - 1] > 1e-7 * (1.0 + m)) return LpStatus::Infeasible;
  // drive remaining artificials out where possible
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) continue;
    for (std::size_t j = 0; j < n; ++j)
      if (std::abs(T[i][j]) > 1e-9) {
        pivot(i, j);
        break;
      }
  }
  // phase 2
  for (std::size_t j = 0; j < w; ++j) T[m][j] = j < n ? c[j] : 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double f = basis[i] < n ? c[basis[i]] : 0.0;
    if (f == 0.0) continue;
    for (std::size_t j = 0; j < w; ++j) T[m][j] -= f * T[i][j];
  }
  // artificials still basic sit at zero; keep them out of the entering set
  if (!run(n)) return LpStatus::Unbounded;
  y.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < n) y[basis[i]] = T[i][w - 1];
  return LpStatus::Optimal;
}

}  // namespace detail

// Rewrites bounds and inequalities into standard form and solves.
inline LpResult solve(const Lp& lp) {
  const std::size_t nv = lp.cost.size();
  // x_j = lower_j + y_j, or y+ - y- when free, or upper_j - y_j when only bounded above
  struct Map {
    int pos = -1, neg = -1;
    double shift = 0.0;
    double sign = 1.0;
  };
  std::vector<Map> map(nv);
  int ny = 0;
  std::vector<double> c;
  std::vector<std::vector<std::pair<int, double>>> extra_rows;
  std::vector<double> extra_rhs;
  for (std::size_t j = 0; j < nv; ++j) {
    const double lo = lp.lower[j], hi = lp.upper[j];
    Map& mp = map[j];
    if (std::isfinite(lo)) {
      mp.shift = lo;
      mp.pos = ny++;
      c.push_back(lp.cost[j]);
      if (std::isfinite(hi)) {
        extra_rows.push_back({{mp.pos, 1.0}});
        extra_rhs.push_back(hi - lo);
      }
    } else if (std::isfinite(hi)) {
      mp.shift = hi;
      mp.sign = -1.0;
      mp.pos = ny++;
      c.push_back(-lp.cost[j]);
    } else {
      mp.pos = ny++;
      mp.neg = ny++;
      c.push_back(lp.cost[j]);
      c.push_back(-lp.cost[j]);
    }
  }
  // rows in y-space: sum a (shift + sign y) sense rhs
  struct YRow {
    std::vector<double> a;
    char sense;
    double rhs;
  };
  std::vector<YRow> yrows;
  auto add = [&](const std::vector<std::pair<int, double>>& terms, char sense, double rhs, bool in_y) {
    YRow r{std::vector<double>(static_cast<std::size_t>(ny), 0.0), sense, rhs};
    for (const auto& [v, a] : terms) {
      if (in_y) {
        r.a[static_cast<std::size_t>(v)] += a;
        continue;
      }
      const Map& mp = map[static_cast<std::size_t>(v)];
      r.rhs -= a * mp.shift;
      r.a[static_cast<std::size_t>(mp.pos)] += a * mp.sign;
      if (mp.neg >= 0) r.a[static_cast<std::size_t>(mp.neg)] -= a;
    }
    yrows.push_back(std::move(r));
  };
  for (const auto& row : lp.rows) add(row.terms, row.sense, row.rhs, false);
  for (std::size_t k = 0; k < extra_rows.size(); ++k) add(extra_rows[k], '<', extra_rhs[k], true);

  // slacks
  std::size_t nslack = 0;
  for (const auto& r : yrows)
    if (r.sense != '=') ++nslack;
  const std::size_t n = static_cast<std::size_t>(ny) + nslack;
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  std::size_t s = static_cast<std::size_t>(ny);
  for (const auto& r : yrows) {
    std::vector<double> a(n, 0.0);
    for (std::size_t j = 0; j < r.a.size(); ++j) a[j] = r.a[j];
    if (r.sense == '<') a[s++] = 1.0;
    if (r.sense == '>') a[s++] = -1.0;
    double rhs = r.rhs;
    if (rhs < 0) {
      for (double& v : a) v = -v;
      rhs = -rhs;
    }
    A.push_back(std::move(a));
    b.push_back(rhs);
  }
  c.resize(n, 0.0);

  std::vector<double> y;
  LpResult res;
  res.status = detail::standard_simplex(std::move(A), std::move(b), c, y);
  if (res.status != LpStatus::Optimal) return res;
  res.x.assign(nv, 0.0);
  for (std::size_t j = 0; j < nv; ++j) {
    const Map& mp = map[j];
    double v = mp.shift + mp.sign * y[static_cast<std::size_t>(mp.pos)];
    if (mp.neg >= 0) v -= y[static_cast<std::size_t>(mp.neg)];
    res.x[j] = v;
    res.objective += lp.cost[j] * v;
  }
  return res;
}

}  // namespace oracle
