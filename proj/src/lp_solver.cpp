// Bounded-variable primal simplex, two phases with explicit artificial
// variables. Dense row-major tableau over structural and slack columns;
// artificial columns are implicit signed unit vectors, so they never pay
// for row operations and can never re-enter the basis. Rows are pre-scaled
// by powers of two, which adds no rounding error. Dantzig pricing until a
// run of degenerate pivots trips Bland's rule, which guarantees
// termination.

#include "relumip/lp_solver.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace relumip {

namespace {

enum class ColStatus : std::uint8_t { Basic, AtLower, AtUpper, FreeZero };

constexpr double kPivTol = 1e-9;    // tableau entries below this never pivot
constexpr double kCostTol = 1e-9;   // reduced-cost threshold for entering
constexpr double kDegenTol = 1e-11; // step sizes below this count as degenerate

enum class LoopResult { Optimal, Unbounded, IterLimit };

struct Simplex {
  Eigen::Index n = 0;      // structural columns
  Eigen::Index m = 0;      // rows
  Eigen::Index nreal = 0;  // n + m: structural + slack columns

  Eigen::MatrixXd A;  // m x nreal, scaled, column-major; truth for refactors
  Eigen::VectorXd b;
  Eigen::VectorXd art_sign;        // +-1 per row: the implicit artificial column
  Eigen::VectorXd lower, upper;    // size nreal + m (artificials at the tail)
  Eigen::VectorXd cost;            // size nreal; artificial cost handled apart
  bool phase_one = true;

  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> W;
  Eigen::VectorXd xB;
  Eigen::RowVectorXd d;  // size nreal
  std::vector<int> basis;
  std::vector<ColStatus> status;  // size nreal + m

  long iterations = 0;
  long max_iterations = 0;
  long pivots_since_refactor = 0;
  int degenerate_run = 0;
  int degenerate_limit = 200;
  bool bland = false;

  bool is_artificial(int col) const { return col >= nreal; }

  double cost_of(int col) const {
    if (is_artificial(col)) return phase_one ? 1.0 : 0.0;
    return phase_one ? 0.0 : cost(col);
  }

  double nb_value(Eigen::Index j) const {
    switch (status[static_cast<std::size_t>(j)]) {
      case ColStatus::AtLower: return lower(j);
      case ColStatus::AtUpper: return upper(j);
      case ColStatus::FreeZero: return 0.0;
      case ColStatus::Basic: break;
    }
    assert(false && "nb_value on basic column");
    return 0.0;
  }

  Eigen::VectorXd real_values() const {
    Eigen::VectorXd v(nreal);
    for (Eigen::Index j = 0; j < nreal; ++j)
      v(j) = status[static_cast<std::size_t>(j)] == ColStatus::Basic ? 0.0 : nb_value(j);
    for (Eigen::Index i = 0; i < m; ++i) {
      const int col = basis[static_cast<std::size_t>(i)];
      if (!is_artificial(col)) v(col) = xB(i);
    }
    return v;
  }

  double artificial_mass() const {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < m; ++i)
      if (is_artificial(basis[static_cast<std::size_t>(i)])) sum += std::abs(xB(i));
    return sum;
  }

  void recompute_reduced_costs() {
    if (m == 0) {
      if (phase_one) d = Eigen::RowVectorXd::Zero(nreal);
      else d = cost.transpose();
      return;
    }
    Eigen::VectorXd cB(m);
    for (Eigen::Index i = 0; i < m; ++i)
      cB(i) = cost_of(basis[static_cast<std::size_t>(i)]);
    if (phase_one)
      d = -(cB.transpose() * W);
    else
      d = cost.transpose() - cB.transpose() * W;
  }

  void refactor() {
    if (m == 0) {
      recompute_reduced_costs();
      return;
    }
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const int col = basis[static_cast<std::size_t>(i)];
      if (is_artificial(col)) {
        const Eigen::Index row = col - nreal;
        B(row, i) = art_sign(row);
      } else {
        B.col(i) = A.col(col);
      }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    W = lu.solve(A);
    Eigen::VectorXd rhs = b;
    for (Eigen::Index j = 0; j < nreal; ++j) {
      if (status[static_cast<std::size_t>(j)] == ColStatus::Basic) continue;
      const double v = nb_value(j);
      if (v != 0.0) rhs -= A.col(j) * v;
    }
    xB = lu.solve(rhs);
    recompute_reduced_costs();
    pivots_since_refactor = 0;
  }

  // Moves column `enter` in direction `dir` by `theta` and swaps it with the
  // basic variable of row `r`. `w` is the entering tableau column captured
  // before any row operations. Entering columns are always real.
  void pivot(Eigen::Index enter, int dir, Eigen::Index r, double theta,
             const Eigen::VectorXd& w) {
    const double entering_value = nb_value(enter) + dir * theta;
    if (theta != 0.0) xB -= (dir * theta) * w;

    const int leave = basis[static_cast<std::size_t>(r)];
    ColStatus leave_status = (dir * w(r) > 0) ? ColStatus::AtLower : ColStatus::AtUpper;
    const double leave_bound =
        leave_status == ColStatus::AtLower ? lower(leave) : upper(leave);
    if (!std::isfinite(leave_bound)) leave_status = ColStatus::FreeZero;
    status[static_cast<std::size_t>(leave)] = leave_status;
    if (is_artificial(leave)) {
      // Once out, an artificial is pinned at zero for good.
      lower(leave) = 0.0;
      upper(leave) = 0.0;
      status[static_cast<std::size_t>(leave)] = ColStatus::AtLower;
    }

    basis[static_cast<std::size_t>(r)] = static_cast<int>(enter);
    status[static_cast<std::size_t>(enter)] = ColStatus::Basic;
    xB(r) = entering_value;

    const double piv = W(r, enter);
    W.row(r) /= piv;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (i == r) continue;
      const double f = W(i, enter);
      if (std::abs(f) > 1e-13) W.row(i) -= f * W.row(r);
    }
    const double de = d(enter);
    if (de != 0.0) d -= de * W.row(r);

    ++iterations;
    ++pivots_since_refactor;
    if (theta <= kDegenTol) {
      if (++degenerate_run >= degenerate_limit) bland = true;
    } else {
      degenerate_run = 0;
    }
  }

  LoopResult run() {
    while (true) {
      if (iterations >= max_iterations) return LoopResult::IterLimit;
      if (pivots_since_refactor >= 512) refactor();

      // Pricing over real columns; artificials can never re-enter.
      Eigen::Index enter = -1;
      int dir = 0;
      double best = kCostTol;
      for (Eigen::Index j = 0; j < nreal; ++j) {
        const ColStatus st = status[static_cast<std::size_t>(j)];
        if (st == ColStatus::Basic) continue;
        if (lower(j) == upper(j)) continue;  // fixed column
        const double dj = d(j);
        int cand = 0;
        if (st == ColStatus::AtLower && dj < -kCostTol) cand = +1;
        else if (st == ColStatus::AtUpper && dj > kCostTol) cand = -1;
        else if (st == ColStatus::FreeZero && std::abs(dj) > kCostTol)
          cand = dj > 0 ? -1 : +1;
        if (cand == 0) continue;
        if (bland) { enter = j; dir = cand; break; }
        if (std::abs(dj) > best) { best = std::abs(dj); enter = j; dir = cand; }
      }
      if (enter < 0) return LoopResult::Optimal;

      const Eigen::VectorXd w = W.col(enter);

      // Ratio test, two passes: tightest step first, then the most stable
      // pivot among rows within tolerance of it.
      double theta_rows = kInf;
      for (Eigen::Index i = 0; i < m; ++i) {
        const double g = dir * w(i);
        const int bi = basis[static_cast<std::size_t>(i)];
        if (g > kPivTol) {
          if (!std::isfinite(lower(bi))) continue;
          theta_rows = std::min(theta_rows, std::max(0.0, (xB(i) - lower(bi)) / g));
        } else if (g < -kPivTol) {
          if (!std::isfinite(upper(bi))) continue;
          theta_rows = std::min(theta_rows, std::max(0.0, (xB(i) - upper(bi)) / g));
        }
      }

      const double range = upper(enter) - lower(enter);  // inf for free columns
      if (range <= theta_rows && std::isfinite(range)) {
        // Bound flip: the entering variable reaches its other bound first.
        xB -= (dir * range) * w;
        status[static_cast<std::size_t>(enter)] =
            dir > 0 ? ColStatus::AtUpper : ColStatus::AtLower;
        ++iterations;
        degenerate_run = 0;
        continue;
      }
      if (!std::isfinite(theta_rows)) return LoopResult::Unbounded;

      Eigen::Index leave_row = -1;
      double best_piv = 0.0;
      int best_bland = 0;
      for (Eigen::Index i = 0; i < m; ++i) {
        const double g = dir * w(i);
        const int bi = basis[static_cast<std::size_t>(i)];
        double ratio;
        if (g > kPivTol && std::isfinite(lower(bi)))
          ratio = std::max(0.0, (xB(i) - lower(bi)) / g);
        else if (g < -kPivTol && std::isfinite(upper(bi)))
          ratio = std::max(0.0, (xB(i) - upper(bi)) / g);
        else
          continue;
        if (ratio > theta_rows + 1e-9) continue;
        if (bland) {
          if (leave_row < 0 || bi < best_bland) { leave_row = i; best_bland = bi; }
        } else if (std::abs(w(i)) > best_piv) {
          best_piv = std::abs(w(i));
          leave_row = i;
        }
      }
      assert(leave_row >= 0);

      const int bi = basis[static_cast<std::size_t>(leave_row)];
      const double g = dir * w(leave_row);
      const double theta =
          g > 0 ? std::max(0.0, (xB(leave_row) - lower(bi)) / g)
                : std::max(0.0, (xB(leave_row) - upper(bi)) / g);
      pivot(enter, dir, leave_row, theta, w);
    }
  }
};

// Power-of-two row scale factor: exact in floating point.
double pow2_scale(double maxabs) {
  if (maxabs <= 0.0 || !std::isfinite(maxabs)) return 1.0;
  int e = 0;
  std::frexp(maxabs, &e);
  return std::ldexp(1.0, -e + 1);  // scaled max magnitude lands in [1, 2)
}

}  // namespace

double max_violation(const LpProblem& p, const Eigen::VectorXd& x) {
  double v = 0.0;
  if (p.num_rows() > 0) {
    const Eigen::VectorXd r = p.rows * x - p.rhs;
    for (Eigen::Index i = 0; i < p.num_rows(); ++i) {
      switch (p.senses[static_cast<std::size_t>(i)]) {
        case Sense::Le: v = std::max(v, r(i)); break;
        case Sense::Ge: v = std::max(v, -r(i)); break;
        case Sense::Eq: v = std::max(v, std::abs(r(i))); break;
      }
    }
  }
  for (Eigen::Index j = 0; j < p.num_vars(); ++j) {
    if (std::isfinite(p.lower(j))) v = std::max(v, p.lower(j) - x(j));
    if (std::isfinite(p.upper(j))) v = std::max(v, x(j) - p.upper(j));
  }
  return v;
}

LpOutcome solve_lp(const LpProblem& p, double tol) {
  LpOptions o;
  o.tol = tol;
  return solve_lp(p, o);
}

LpOutcome solve_lp(const LpProblem& p, const LpOptions& opts) {
  const Eigen::Index n = p.num_vars();
  const Eigen::Index m = p.num_rows();
  if (p.rows.cols() != n && m > 0)
    throw std::invalid_argument("solve_lp: row width does not match variable count");
  if (p.lower.size() != n || p.upper.size() != n)
    throw std::invalid_argument("solve_lp: bound vectors do not match variable count");
  if (static_cast<Eigen::Index>(p.senses.size()) != m)
    throw std::invalid_argument("solve_lp: sense list does not match row count");

  LpOutcome out;
  for (Eigen::Index j = 0; j < n; ++j)
    if (p.lower(j) > p.upper(j)) return out;  // crossing bounds: Infeasible

  Simplex s;
  s.n = n;
  s.m = m;
  s.nreal = n + m;
  s.degenerate_limit = opts.degenerate_limit;
  s.max_iterations =
      opts.max_iterations > 0 ? opts.max_iterations : 2000 + 60 * static_cast<long>(n + m);

  s.A = Eigen::MatrixXd::Zero(m, s.nreal);
  s.b.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double rho = pow2_scale(p.rows.row(i).cwiseAbs().maxCoeff());
    s.A.row(i).head(n) = rho * p.rows.row(i);
    s.b(i) = rho * p.rhs(i);
  }

  s.lower.resize(s.nreal + m);
  s.upper.resize(s.nreal + m);
  s.lower.head(n) = p.lower;
  s.upper.head(n) = p.upper;
  for (Eigen::Index i = 0; i < m; ++i) {
    s.A(i, n + i) = 1.0;  // slack
    switch (p.senses[static_cast<std::size_t>(i)]) {
      case Sense::Le: s.lower(n + i) = 0.0;   s.upper(n + i) = kInf; break;
      case Sense::Ge: s.lower(n + i) = -kInf; s.upper(n + i) = 0.0;  break;
      case Sense::Eq: s.lower(n + i) = 0.0;   s.upper(n + i) = 0.0;  break;
    }
    s.lower(s.nreal + i) = 0.0;
    s.upper(s.nreal + i) = kInf;
  }

  s.status.assign(static_cast<std::size_t>(s.nreal + m), ColStatus::AtLower);
  for (Eigen::Index j = 0; j < s.nreal; ++j) {
    if (std::isfinite(s.lower(j))) s.status[static_cast<std::size_t>(j)] = ColStatus::AtLower;
    else if (std::isfinite(s.upper(j))) s.status[static_cast<std::size_t>(j)] = ColStatus::AtUpper;
    else s.status[static_cast<std::size_t>(j)] = ColStatus::FreeZero;
  }

  // Artificial basis sized to the initial residual, one per row.
  Eigen::VectorXd v0 = Eigen::VectorXd::Zero(s.nreal);
  for (Eigen::Index j = 0; j < s.nreal; ++j)
    if (s.status[static_cast<std::size_t>(j)] != ColStatus::FreeZero) v0(j) = s.nb_value(j);
  const Eigen::VectorXd resid = s.b - s.A * v0;

  s.basis.resize(static_cast<std::size_t>(m));
  s.W.resize(m, s.nreal);
  s.xB.resize(m);
  s.art_sign.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sign = resid(i) >= 0 ? 1.0 : -1.0;
    s.art_sign(i) = sign;
    s.W.row(i) = sign * s.A.row(i);
    s.xB(i) = std::abs(resid(i));
    s.basis[static_cast<std::size_t>(i)] = static_cast<int>(s.nreal + i);
    s.status[static_cast<std::size_t>(s.nreal + i)] = ColStatus::Basic;
  }

  // Phase 1: drive the artificials to zero.
  s.phase_one = true;
  s.cost = Eigen::VectorXd::Zero(s.nreal);
  s.recompute_reduced_costs();

  LoopResult r = s.run();
  if (r == LoopResult::IterLimit) { out.status = LpStatus::IterationLimit; out.iterations = s.iterations; return out; }

  if (s.artificial_mass() > opts.tol) {
    out.status = LpStatus::Infeasible;
    out.iterations = s.iterations;
    return out;
  }

  // Remove artificials from the basis where a real pivot exists; rows that
  // admit none are redundant and keep their artificial pinned at zero.
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!s.is_artificial(s.basis[static_cast<std::size_t>(i)])) continue;
    Eigen::Index pick = -1;
    double best = 1e-7;
    for (Eigen::Index j = 0; j < s.nreal; ++j) {
      if (s.status[static_cast<std::size_t>(j)] == ColStatus::Basic) continue;
      if (std::abs(s.W(i, j)) > best) { best = std::abs(s.W(i, j)); pick = j; }
    }
    if (pick >= 0) {
      const Eigen::VectorXd w = s.W.col(pick);
      s.pivot(pick, +1, i, 0.0, w);
    }
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    s.lower(s.nreal + i) = 0.0;
    s.upper(s.nreal + i) = 0.0;
  }

  // Phase 2: the real objective, internally always minimized.
  s.phase_one = false;
  s.cost.setZero();
  s.cost.head(n) = p.sense == ObjSense::Minimize ? p.objective : (-p.objective).eval();
  s.recompute_reduced_costs();

  for (int attempt = 0; attempt < 4; ++attempt) {
    r = s.run();
    if (r == LoopResult::IterLimit) { out.status = LpStatus::IterationLimit; out.iterations = s.iterations; return out; }
    if (r == LoopResult::Unbounded) { out.status = LpStatus::Unbounded; out.iterations = s.iterations; return out; }

    const Eigen::VectorXd x = s.real_values().head(n);
    if (max_violation(p, x) <= opts.tol) {
      out.status = LpStatus::Optimal;
      out.values = x;
      out.objective = p.objective.dot(x) + p.objective_constant;
      out.iterations = s.iterations;
      return out;
    }
    s.refactor();  // drift: rebuild from the basis and keep iterating
  }
  out.status = LpStatus::IterationLimit;
  out.iterations = s.iterations;
  return out;
}

}  // namespace relumip
