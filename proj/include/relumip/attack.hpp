#pragma once
// Scenario enumeration, per-scenario attack synthesis with independent
// verification against the real network, a grid-search oracle for small
// scenarios, and the campaign harness that aggregates results.

#include <cstdint>
#include <optional>
#include <string>

#include "relumip/attack_config.hpp"

namespace relumip {

struct Scenario {
  std::vector<Index> indices;  // strictly increasing
  std::int64_t id = 0;         // lexicographic rank among C(n, k) combinations
};

/// All C(n_inputs, k) index sets in lexicographic order.
std::vector<Scenario> enumerate_scenarios(Index n_inputs, int k);

/// C(n, k) with an overflow guard.
std::int64_t scenario_count(Index n, int k);

enum class AttackStatus : std::uint8_t { Success, NoAttackExists, TimedOut, Error };

const char* to_string(AttackStatus s);

struct AttackResult {
  Scenario scenario;
  AttackStatus status = AttackStatus::Error;
  Eigen::VectorXd delta;             // full length; empty unless an attack was found
  Eigen::VectorXd achieved_outputs;  // forward(net, base + delta)
  std::vector<double> objective;     // one entry per objective level
  double wall_time_s = 0.0;
  bool verified = false;
  bool hit_time_limit = false;  // attack found, but the solver hit its limit
  long nodes = 0;
  std::string detail;
};

struct VerifyOutcome {
  enum class Reason : std::uint8_t {
    Ok,
    NoDelta,
    DimMismatch,
    OutOfScenario,
    DeltaOutOfBounds,
    ConstraintViolated,
  };
  bool ok = false;
  Reason reason = Reason::Ok;
  std::string detail;

  explicit operator bool() const { return ok; }
};

const char* to_string(VerifyOutcome::Reason r);

/// Recomputes forward(net, base + delta) and checks the attack condition at
/// tolerance 1e-6 (margin constraints re-checked at eps/2), the delta
/// bounds, and that nothing outside the scenario moved.
VerifyOutcome verify(const Networkd& net, const AttackResult& result,
                     const AttackConfig& cfg);

/// Encode, solve, decode, verify. A Success status implies verification
/// passed; a verification failure on a solver-optimal solution throws.
AttackResult synthesize(const Networkd& net, const AttackConfig& cfg,
                        const Scenario& scenario, const SolverConfig& solver);

struct BruteForceResult {
  Eigen::VectorXd delta;
  double objective = 0.0;      // sum of weighted absolute deltas
  double level1 = 0.0;         // target output value (hierarchical only)
  bool has_level1 = false;
};

/// Exhaustive grid scan over the scenario's delta box (scenario size <= 3).
/// Returns the feasible point with minimal weighted |delta| (hierarchical:
/// maximal target output first); ties resolve to the lexicographically
/// first grid point.
std::optional<BruteForceResult> brute_force(const Networkd& net, const AttackConfig& cfg,
                                            const Scenario& scenario, double step);

struct CampaignTotals {
  long successful = 0;
  long no_attack = 0;
  long timed_out = 0;
  long errors = 0;
  long success_with_timeout = 0;  // subset of successful
  long total = 0;
};

struct CampaignReport {
  std::vector<AttackResult> results;  // ordered by (k, scenario rank)
  CampaignTotals totals;
  double peak_time_s = 0.0;
  double mean_time_s = 0.0;
  std::string config_echo;
};

/// Runs synthesize over every scenario for every k. Scenario solves run on
/// `parallelism` threads; the result order is deterministic regardless.
/// Per-scenario failures are recorded and the campaign continues.
CampaignReport run_campaign(const Networkd& net, const AttackConfig& cfg,
                            const std::vector<int>& ks, const SolverConfig& solver,
                            int parallelism);

}  // namespace relumip
