#pragma once
// Attack configuration files: base input, which inputs may move and by how
// much, the required output condition, and the objective. See the README
// for the JSON schema.

#include <iosfwd>
#include <string>

#include "relumip/encoder.hpp"

namespace relumip {

struct AttackConfig {
  Eigen::VectorXd base_input;
  bool allow_all = true;
  std::vector<Index> allowed;          // meaningful when !allow_all
  Eigen::VectorXd delta_lo, delta_hi;  // full length
  Eigen::VectorXd weights;             // full length
  AttackConstraint constraint;
  ObjectiveKind objective = MinPerturbation{};
  double eps = 1e-4;  // default margin for ordering constraints
  SolverConfig solver;
  std::string raw;  // original JSON document, echoed into reports

  /// Perturbation spec restricted to one scenario's index set.
  PerturbationSpec perturbation_for(const std::vector<Index>& scenario) const;

  /// The scenario implied by the config itself ("all" or the allowed list).
  std::vector<Index> own_scenario() const;
};

AttackConfig parse_attack_config(const std::string& json_text, const Networkd& net);
AttackConfig load_attack_config(std::istream& in, const Networkd& net);
AttackConfig load_attack_config_file(const std::string& path, const Networkd& net);

}  // namespace relumip
