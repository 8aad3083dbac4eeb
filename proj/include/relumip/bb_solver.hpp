#pragma once
// Branch-and-bound over binary guard variables with LP relaxation bounds,
// best-first node selection, and lexicographic (hierarchical) objectives.
// Branching a guard activates the matching indicator constraint directly in
// the child LPs; unfixed guards are relaxed through big-M rows.

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <unordered_map>

#include "relumip/milp_model.hpp"

namespace relumip {

enum class BranchRule : std::uint8_t { MostFractional };

using FixingsMap = std::unordered_map<VarId, double>;

struct SolverConfig {
  double time_limit_s = 25200.0;  // 7 hours
  double feasibility_tol = 1e-7;
  double integrality_tol = 1e-6;
  long node_limit = std::numeric_limits<long>::max();
  BranchRule branch_rule = BranchRule::MostFractional;
  double lex_tol = 1e-6;
  std::ostream* trace = nullptr;  // one line per node when set

  // Optional primal heuristic: propose binary fixings from LP relaxation
  // values (e.g. the true activation pattern of the decoded perturbation).
  // Candidates are validated by solving the fixed LP, so a bad proposal can
  // never corrupt the search.
  std::function<FixingsMap(const Eigen::VectorXd&)> repair;

  // Optional bound tightening under a node's fixings: return intervals that
  // are valid for every completion of those fixings (big-M constants shrink
  // accordingly), or nullopt when the fixings are already contradictory.
  // The callback may append implied fixings it can prove (e.g. guards whose
  // neurons the tightened intervals already decide).
  std::function<std::optional<BoundsMap>(FixingsMap&)> tighten;

  void validate() const;
};

enum class MilpStatus : std::uint8_t { Optimal, Infeasible, TimedOut, NodeLimit, Unbounded };

const char* to_string(MilpStatus s);

struct MilpSolution {
  Eigen::VectorXd values;
  std::vector<double> objective;  // one entry per lexicographic level
};

struct SearchStats {
  long nodes = 0;
  long lp_iterations = 0;
  long peak_open = 0;
  double wall_time_s = 0.0;
  bool unbounded_relaxation = false;
  bool exact = true;  // false when a node LP failed numerically
};

struct MilpOutcome {
  MilpStatus status = MilpStatus::Infeasible;
  std::optional<MilpSolution> best;
  SearchStats stats;
};

/// LP relaxation of the model under `fixings`: fixed guards activate their
/// matching indicator rows verbatim (the mismatched side vanishes), unfixed
/// indicators become big-M rows over `bounds`, binaries relax to [0, 1].
/// `objective_index` selects a model objective; -1 means a zero objective.
LpProblem build_relaxation(const MilpModel& model, const BoundsMap& bounds,
                           const FixingsMap& fixings, int objective_index);

/// Solves a frozen model with exactly one objective to global optimality
/// within the configured tolerances.
MilpOutcome solve_milp(const MilpModel& model, const SolverConfig& cfg = {},
                       const BoundsMap& bounds = {});

/// Solves objectives in priority order: each level is optimized subject to
/// all earlier levels staying within lex_tol of their attained optima.
MilpOutcome lexicographic_solve(const MilpModel& model, const SolverConfig& cfg = {},
                                const BoundsMap& bounds = {});

}  // namespace relumip
