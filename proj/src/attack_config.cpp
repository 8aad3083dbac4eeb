#include "relumip/attack_config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace relumip {

namespace {

using nlohmann::json;

Eigen::VectorXd broadcast(const json& j, Index n, const char* what) {
  if (j.is_number()) return Eigen::VectorXd::Constant(n, j.get<double>());
  if (j.is_array()) {
    const auto v = j.get<std::vector<double>>();
    if (static_cast<Index>(v.size()) != n)
      throw std::invalid_argument(std::string("attack config: ") + what + " has " +
                                  std::to_string(v.size()) + " entries, expected " +
                                  std::to_string(n));
    return Eigen::Map<const Eigen::VectorXd>(v.data(), n);
  }
  throw std::invalid_argument(std::string("attack config: ") + what +
                              " must be a number or an array");
}

AttackConstraint parse_constraint(const json& j, const Networkd& net, double default_eps) {
  const std::string kind = j.at("kind").get<std::string>();
  const double eps = j.value("eps", default_eps);
  if (kind == "output_range") {
    return OutputRange{j.at("index").get<Index>(), j.at("lo").get<double>(),
                       j.at("hi").get<double>()};
  }
  if (kind == "min_score") {
    return MinScore{j.at("target").get<Index>(), eps};
  }
  if (kind == "partial_ordering") {
    return PartialOrdering{j.at("first").get<Index>(), j.at("second").get<Index>(), eps};
  }
  if (kind == "total_ordering") {
    TotalOrdering t;
    t.order = j.at("order").get<std::vector<Index>>();
    t.eps = eps;
    if (static_cast<Index>(t.order.size()) != net.output_dim())
      throw std::invalid_argument("attack config: total ordering must list every output");
    return t;
  }
  if (kind == "min_output_increase") {
    return MinOutputIncrease{j.at("index").get<Index>(), j.at("threshold").get<double>()};
  }
  throw std::invalid_argument("attack config: unknown constraint kind \"" + kind + "\"");
}

ObjectiveKind parse_objective(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "min_perturbation") return MinPerturbation{};
    throw std::invalid_argument("attack config: unknown objective \"" + s + "\"");
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "min_perturbation") return MinPerturbation{};
  if (kind == "hierarchical") return Hierarchical{j.at("target").get<Index>()};
  throw std::invalid_argument("attack config: unknown objective kind \"" + kind + "\"");
}

}  // namespace

PerturbationSpec AttackConfig::perturbation_for(const std::vector<Index>& scenario) const {
  PerturbationSpec p;
  p.base_input = base_input;
  p.allowed = scenario;
  p.delta_lo = delta_lo;
  p.delta_hi = delta_hi;
  p.weights = weights;
  return p;
}

std::vector<Index> AttackConfig::own_scenario() const {
  if (!allow_all) return allowed;
  std::vector<Index> all(static_cast<std::size_t>(base_input.size()));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Index>(i);
  return all;
}

AttackConfig parse_attack_config(const std::string& json_text, const Networkd& net) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("attack config: JSON parse failure: ") +
                                e.what());
  }

  AttackConfig cfg;
  try {
    const auto base = doc.at("base_input").get<std::vector<double>>();
    if (static_cast<Index>(base.size()) != net.input_dim)
      throw std::invalid_argument("attack config: base input has " +
                                  std::to_string(base.size()) + " entries, expected " +
                                  std::to_string(net.input_dim));
    cfg.base_input =
        Eigen::Map<const Eigen::VectorXd>(base.data(), static_cast<Index>(base.size()));

    if (doc.contains("allowed") && !(doc["allowed"].is_string())) {
      cfg.allow_all = false;
      cfg.allowed = doc["allowed"].get<std::vector<Index>>();
    } else if (doc.contains("allowed") &&
               doc["allowed"].get<std::string>() != "all") {
      throw std::invalid_argument("attack config: \"allowed\" must be \"all\" or a list");
    }

    const json& jd = doc.at("delta");
    if (jd.is_number()) {
      const double d = jd.get<double>();
      cfg.delta_lo = Eigen::VectorXd::Constant(net.input_dim, -d);
      cfg.delta_hi = Eigen::VectorXd::Constant(net.input_dim, d);
    } else {
      cfg.delta_lo = broadcast(jd.at("lo"), net.input_dim, "delta.lo");
      cfg.delta_hi = broadcast(jd.at("hi"), net.input_dim, "delta.hi");
    }

    cfg.weights = doc.contains("weights")
                      ? broadcast(doc["weights"], net.input_dim, "weights")
                      : Eigen::VectorXd::Ones(net.input_dim);

    // Optional clamps keep perturbed inputs inside a plausible sensor range.
    if (doc.contains("input_min")) {
      const Eigen::VectorXd mn = broadcast(doc["input_min"], net.input_dim, "input_min");
      cfg.delta_lo = cfg.delta_lo.cwiseMax(mn - cfg.base_input);
    }
    if (doc.contains("input_max")) {
      const Eigen::VectorXd mx = broadcast(doc["input_max"], net.input_dim, "input_max");
      cfg.delta_hi = cfg.delta_hi.cwiseMin(mx - cfg.base_input);
    }

    cfg.eps = doc.value("eps", 1e-4);
    cfg.constraint = parse_constraint(doc.at("constraint"), net, cfg.eps);
    if (doc.contains("objective")) cfg.objective = parse_objective(doc["objective"]);

    if (doc.contains("solver")) {
      const json& js = doc["solver"];
      cfg.solver.time_limit_s = js.value("time_limit_s", cfg.solver.time_limit_s);
      cfg.solver.feasibility_tol = js.value("feasibility_tol", cfg.solver.feasibility_tol);
      cfg.solver.integrality_tol = js.value("integrality_tol", cfg.solver.integrality_tol);
      cfg.solver.node_limit = js.value("node_limit", cfg.solver.node_limit);
      cfg.solver.validate();
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("attack config: malformed document: ") +
                                e.what());
  }

  cfg.raw = doc.dump();
  return cfg;
}

AttackConfig load_attack_config(std::istream& in, const Networkd& net) {
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_attack_config(ss.str(), net);
}

AttackConfig load_attack_config_file(const std::string& path, const Networkd& net) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open attack config: " + path);
  return load_attack_config(in, net);
}

}  // namespace relumip
