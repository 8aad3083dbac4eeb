#pragma once
// Translates a network plus a perturbation specification into a MILP.
// Every ReLU neuron becomes the equality  sum_j w_ij * in_j + b_i = x - s
// with x, s >= 0 and an indicator pair on a binary ac: ac = 1 forces x <= 0
// (neuron inactive), ac = 0 forces s <= 0 (neuron active). Layer-0 inputs
// are constants plus split perturbation variables dx = dx+ - dx- on the
// attacker-controlled indices. Interval propagation over the perturbation
// box supplies variable bounds and big-M constants.

#include <optional>
#include <variant>
#include <vector>

#include "relumip/bb_solver.hpp"
#include "relumip/network.hpp"

namespace relumip {

struct PerturbationSpec {
  Eigen::VectorXd base_input;          // the clean sensor reading
  std::vector<Index> allowed;          // indices the attacker may move, ascending
  Eigen::VectorXd delta_lo, delta_hi;  // per-index bounds, lo <= 0 <= hi
  Eigen::VectorXd weights;             // per-index objective weight, >= 0

  void validate(Index input_dim) const;

  /// Reachable input box: base shifted by the delta bounds on allowed
  /// indices, degenerate elsewhere.
  IntervalBoxd box() const;
};

/// Uniform helper: every input allowed, symmetric bound `radius`, weight 1.
PerturbationSpec uniform_perturbation(const Eigen::VectorXd& base, double radius);

// -- Output-side attack conditions ------------------------------------------

struct OutputRange {       // lo <= out[index] <= hi
  Index index = 0;
  double lo = -kInf;
  double hi = kInf;
};
struct MinScore {          // out[target] <= out[j] - eps for all j != target
  Index target = 0;
  double eps = 1e-4;
};
struct PartialOrdering {   // first, then second, strictly below the rest
  Index first = 0;
  Index second = 1;
  double eps = 1e-4;
};
struct TotalOrdering {     // out[order[r]] <= out[order[r+1]] - eps
  std::vector<Index> order;
  double eps = 1e-4;
};
struct MinOutputIncrease {  // out[index] >= clean output + threshold
  Index index = 0;
  double threshold = 0.0;
};

using AttackConstraint =
    std::variant<OutputRange, MinScore, PartialOrdering, TotalOrdering, MinOutputIncrease>;

// -- Objectives --------------------------------------------------------------

struct MinPerturbation {};  // minimize sum_i w_i * (dx+_i + dx-_i)
struct Hierarchical {       // maximize out[target], then MinPerturbation
  Index target = 0;
};
using ObjectiveKind = std::variant<MinPerturbation, Hierarchical>;

// -- Encoded model -----------------------------------------------------------

struct NeuronVars {
  VarId post = -1;   // x: post-activation value
  VarId slack = -1;  // s: negative part of the pre-activation
  VarId guard = -1;  // ac: 1 iff the neuron is inactive
};

struct DeltaVars {
  VarId plus = -1;
  VarId minus = -1;
};

struct EncodedAttack {
  MilpModel model;
  std::vector<std::vector<NeuronVars>> relu_vars;     // per ReLU layer, in order
  std::vector<std::optional<DeltaVars>> delta_vars;   // indexed by input
  std::vector<VarId> output_vars;
  BoundsMap bounds;               // interval-derived, keyed by VarId
  Eigen::VectorXd clean_output;   // forward(net, base_input)
  PerturbationSpec pert;
  bool hierarchical = false;

  Index relu_neuron_count() const {
    Index n = 0;
    for (const auto& l : relu_vars) n += static_cast<Index>(l.size());
    return n;
  }
};

EncodedAttack encode(const Networkd& net, const PerturbationSpec& pert);

void add_attack_constraint(EncodedAttack& ea, const AttackConstraint& c);

/// Installs the objective(s); replaces any previously set. Hierarchical
/// produces a two-level objective list for lexicographic_solve.
void set_objective(EncodedAttack& ea, const ObjectiveKind& kind);

/// Pure LP obtained by pinning every ac to the given activation pattern and
/// activating the matching indicator constraints.
LpProblem fix_pattern(const EncodedAttack& ea, const std::vector<std::uint8_t>& pattern);

/// Full-length input perturbation read off a solution vector (zero outside
/// the allowed set).
Eigen::VectorXd decode_delta(const EncodedAttack& ea, const Eigen::VectorXd& solution);

/// Removes common padding from each (dx+, dx-) pair without changing the
/// decoded perturbation.
Eigen::VectorXd canonicalize_solution(const EncodedAttack& ea, Eigen::VectorXd solution);

/// Interval propagation refined by partial guard fixings: a neuron fixed
/// inactive contributes exactly zero, one fixed active passes its
/// sign-restricted pre-activation. The returned intervals are valid for
/// every completion of the fixings; nullopt means the fixings contradict
/// the reachable intervals. Feeds per-node big-M constants in the search.
std::optional<BoundsMap> propagate_bounds(const Networkd& net, const EncodedAttack& ea,
                                          FixingsMap& fixings);

}  // namespace relumip
