#pragma once
// Continuous linear programs and a bounded-variable primal simplex solver.
// This is the relaxation engine underneath the branch-and-bound search.

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <vector>

namespace relumip {

enum class Sense : std::uint8_t { Le, Eq, Ge };
enum class ObjSense : std::uint8_t { Minimize, Maximize };

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Dense LP in row form: optimize c'x + c0 subject to row senses and
/// per-variable bounds (+-inf allowed). No integrality anywhere.
struct LpProblem {
  ObjSense sense = ObjSense::Minimize;
  Eigen::VectorXd objective;
  double objective_constant = 0.0;

  Eigen::MatrixXd rows;  // one constraint per row
  Eigen::VectorXd rhs;
  std::vector<Sense> senses;

  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index num_vars() const { return objective.size(); }
  Eigen::Index num_rows() const { return rows.rows(); }
};

enum class LpStatus : std::uint8_t { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpOutcome {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd values;  // filled only when Optimal
  double objective = 0.0;  // meaningful only when Optimal
  long iterations = 0;
};

/// Two-phase bounded-variable primal simplex with explicit artificial
/// variables. Dantzig pricing, switching to Bland's rule after
/// `degenerate_limit` consecutive degenerate pivots. Deterministic:
/// identical problems give bit-identical outcomes within one build.
struct LpOptions {
  double tol = 1e-7;          // feasibility tolerance
  long max_iterations = 0;    // 0 = scale with problem size
  int degenerate_limit = 200;
};

LpOutcome solve_lp(const LpProblem& p, const LpOptions& opts = {});
LpOutcome solve_lp(const LpProblem& p, double tol);

/// Largest violation of rows and bounds at x (0 when feasible).
double max_violation(const LpProblem& p, const Eigen::VectorXd& x);

}  // namespace relumip
