#include "relumip/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace relumip {

void PerturbationSpec::validate(Index input_dim) const {
  if (base_input.size() != input_dim)
    throw std::invalid_argument("perturbation: base input has dimension " +
                                std::to_string(base_input.size()) + ", expected " +
                                std::to_string(input_dim));
  if (!base_input.allFinite())
    throw std::invalid_argument("perturbation: non-finite base input");
  if (delta_lo.size() != input_dim || delta_hi.size() != input_dim ||
      weights.size() != input_dim)
    throw std::invalid_argument("perturbation: bound/weight vectors must match input_dim");
  Index prev = -1;
  for (Index i : allowed) {
    if (i < 0 || i >= input_dim)
      throw std::invalid_argument("perturbation: allowed index " + std::to_string(i) +
                                  " out of range");
    if (i <= prev)
      throw std::invalid_argument("perturbation: allowed indices must be strictly increasing");
    prev = i;
    if (!std::isfinite(delta_lo(i)) || !std::isfinite(delta_hi(i)))
      throw std::invalid_argument("perturbation: non-finite delta bound at index " +
                                  std::to_string(i));
    if (delta_lo(i) > 0.0 || delta_hi(i) < 0.0)
      throw std::invalid_argument("perturbation: delta bounds at index " +
                                  std::to_string(i) + " do not bracket 0");
  }
  for (Index i = 0; i < input_dim; ++i)
    if (!(weights(i) >= 0.0))
      throw std::invalid_argument("perturbation: negative weight at index " +
                                  std::to_string(i));
}

IntervalBoxd PerturbationSpec::box() const {
  IntervalBoxd b{base_input, base_input};
  for (Index i : allowed) {
    b.lo(i) += delta_lo(i);
    b.hi(i) += delta_hi(i);
  }
  return b;
}

PerturbationSpec uniform_perturbation(const Eigen::VectorXd& base, double radius) {
  PerturbationSpec p;
  p.base_input = base;
  p.allowed.resize(static_cast<std::size_t>(base.size()));
  for (Index i = 0; i < base.size(); ++i) p.allowed[static_cast<std::size_t>(i)] = i;
  p.delta_lo = Eigen::VectorXd::Constant(base.size(), -radius);
  p.delta_hi = Eigen::VectorXd::Constant(base.size(), radius);
  p.weights = Eigen::VectorXd::Ones(base.size());
  return p;
}

EncodedAttack encode(const Networkd& net, const PerturbationSpec& pert) {
  pert.validate(net.input_dim);

  EncodedAttack ea;
  ea.pert = pert;
  ea.clean_output = forward(net, pert.base_input);
  const auto intervals = interval_bounds(net, pert.box());

  MilpModel& m = ea.model;

  ea.delta_vars.assign(static_cast<std::size_t>(net.input_dim), std::nullopt);
  for (Index i : pert.allowed) {
    DeltaVars dv;
    dv.plus = m.add_var({VarKind::Continuous, 0.0, pert.delta_hi(i),
                         "dp" + std::to_string(i)});
    dv.minus = m.add_var({VarKind::Continuous, 0.0, -pert.delta_lo(i),
                          "dm" + std::to_string(i)});
    ea.delta_vars[static_cast<std::size_t>(i)] = dv;
    ea.bounds[dv.plus] = {0.0, pert.delta_hi(i)};
    ea.bounds[dv.minus] = {0.0, -pert.delta_lo(i)};
  }

  // Variables layer by layer. A stable neuron (pre-activation interval on
  // one side of zero) gets its guard pinned; pinning to 1 requires a
  // strictly negative interval so a zero pre-activation stays on the active
  // branch.
  std::vector<VarId> prev_post;  // empty for layer 0 (inputs are constants)
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    const Layerd& layer = net.layers[k];
    const auto& iv = intervals[k];
    const std::string suffix = std::to_string(k + 1) + "_";
    std::vector<VarId> post(static_cast<std::size_t>(layer.fan_out()));

    if (layer.activation == Activation::ReLU) {
      std::vector<NeuronVars> nv(static_cast<std::size_t>(layer.fan_out()));
      for (Index i = 0; i < layer.fan_out(); ++i) {
        const double plo = iv.pre_lo(i), phi = iv.pre_hi(i);
        NeuronVars v;
        v.post = m.add_var({VarKind::Continuous, std::max(0.0, plo), std::max(0.0, phi),
                            "x" + suffix + std::to_string(i)});
        v.slack = m.add_var({VarKind::Continuous, std::max(0.0, -phi), std::max(0.0, -plo),
                             "s" + suffix + std::to_string(i)});
        double aclo = 0.0, achi = 1.0;
        if (plo >= 0.0) achi = 0.0;
        else if (phi < 0.0) aclo = 1.0;
        v.guard = m.add_var({VarKind::Binary, aclo, achi, "ac" + suffix + std::to_string(i)});
        ea.bounds[v.post] = {std::max(0.0, plo), std::max(0.0, phi)};
        ea.bounds[v.slack] = {std::max(0.0, -phi), std::max(0.0, -plo)};
        nv[static_cast<std::size_t>(i)] = v;
        post[static_cast<std::size_t>(i)] = v.post;
      }
      ea.relu_vars.push_back(std::move(nv));
    } else {
      for (Index i = 0; i < layer.fan_out(); ++i) {
        const VarId out = m.add_var({VarKind::Continuous, iv.pre_lo(i), iv.pre_hi(i),
                                     "out" + std::to_string(i)});
        ea.bounds[out] = {iv.pre_lo(i), iv.pre_hi(i)};
        post[static_cast<std::size_t>(i)] = out;
      }
    }

    // One row per neuron: the affine map equals x - s (ReLU) or the output
    // variable (linear).
    for (Index i = 0; i < layer.fan_out(); ++i) {
      LinearExpr lhs;
      double rhs = -layer.biases(i);
      if (k == 0) {
        rhs -= layer.weights.row(i).dot(pert.base_input);
        for (Index j : pert.allowed) {
          const auto& dv = *ea.delta_vars[static_cast<std::size_t>(j)];
          lhs.add(layer.weights(i, j), dv.plus);
          lhs.add(-layer.weights(i, j), dv.minus);
        }
      } else {
        for (Index j = 0; j < layer.fan_in(); ++j)
          lhs.add(layer.weights(i, j), prev_post[static_cast<std::size_t>(j)]);
      }
      if (layer.activation == Activation::ReLU) {
        const NeuronVars& v = ea.relu_vars.back()[static_cast<std::size_t>(i)];
        lhs.add(-1.0, v.post);
        lhs.add(1.0, v.slack);
      } else {
        lhs.add(-1.0, post[static_cast<std::size_t>(i)]);
      }
      m.add_constraint({std::move(lhs), Sense::Eq, rhs});
    }

    if (layer.activation == Activation::ReLU) {
      for (const NeuronVars& v : ea.relu_vars.back()) {
        m.add_indicator({v.guard, 1, {LinearExpr{}.add(1.0, v.post), Sense::Le, 0.0}});
        m.add_indicator({v.guard, 0, {LinearExpr{}.add(1.0, v.slack), Sense::Le, 0.0}});
      }
    }

    prev_post = std::move(post);
  }

  ea.output_vars = prev_post;
  return ea;
}

namespace {

void check_output_index(const EncodedAttack& ea, Index i, const char* what) {
  if (i < 0 || i >= static_cast<Index>(ea.output_vars.size()))
    throw std::invalid_argument(std::string(what) + ": output index " +
                                std::to_string(i) + " out of range");
}

void check_eps(double eps, const char* what) {
  if (!(eps > 0.0))
    throw std::invalid_argument(std::string(what) + ": eps must be positive");
}

// a <= b - eps
void add_margin_row(EncodedAttack& ea, VarId a, VarId b, double eps) {
  LinearExpr e;
  e.add(1.0, a).add(-1.0, b);
  ea.model.add_constraint({std::move(e), Sense::Le, -eps});
}

}  // namespace

void add_attack_constraint(EncodedAttack& ea, const AttackConstraint& c) {
  const Index nout = static_cast<Index>(ea.output_vars.size());
  std::visit(
      [&](const auto& ac) {
        using T = std::decay_t<decltype(ac)>;
        if constexpr (std::is_same_v<T, OutputRange>) {
          check_output_index(ea, ac.index, "output range");
          if (ac.lo > ac.hi)
            throw std::invalid_argument("output range: lo exceeds hi");
          ea.model.restrict_bounds(ea.output_vars[static_cast<std::size_t>(ac.index)],
                                   ac.lo, ac.hi);
        } else if constexpr (std::is_same_v<T, MinScore>) {
          check_output_index(ea, ac.target, "min score");
          check_eps(ac.eps, "min score");
          for (Index j = 0; j < nout; ++j)
            if (j != ac.target)
              add_margin_row(ea, ea.output_vars[static_cast<std::size_t>(ac.target)],
                             ea.output_vars[static_cast<std::size_t>(j)], ac.eps);
        } else if constexpr (std::is_same_v<T, PartialOrdering>) {
          check_output_index(ea, ac.first, "partial ordering");
          check_output_index(ea, ac.second, "partial ordering");
          if (ac.first == ac.second)
            throw std::invalid_argument("partial ordering: indices must differ");
          check_eps(ac.eps, "partial ordering");
          add_margin_row(ea, ea.output_vars[static_cast<std::size_t>(ac.first)],
                         ea.output_vars[static_cast<std::size_t>(ac.second)], ac.eps);
          for (Index j = 0; j < nout; ++j)
            if (j != ac.first && j != ac.second)
              add_margin_row(ea, ea.output_vars[static_cast<std::size_t>(ac.second)],
                             ea.output_vars[static_cast<std::size_t>(j)], ac.eps);
        } else if constexpr (std::is_same_v<T, TotalOrdering>) {
          check_eps(ac.eps, "total ordering");
          if (static_cast<Index>(ac.order.size()) != nout)
            throw std::invalid_argument("total ordering: order must cover every output");
          std::vector<bool> seen(static_cast<std::size_t>(nout), false);
          for (Index i : ac.order) {
            check_output_index(ea, i, "total ordering");
            if (seen[static_cast<std::size_t>(i)])
              throw std::invalid_argument("total ordering: order is not a permutation");
            seen[static_cast<std::size_t>(i)] = true;
          }
          for (std::size_t r = 0; r + 1 < ac.order.size(); ++r)
            add_margin_row(ea, ea.output_vars[static_cast<std::size_t>(ac.order[r])],
                           ea.output_vars[static_cast<std::size_t>(ac.order[r + 1])],
                           ac.eps);
        } else if constexpr (std::is_same_v<T, MinOutputIncrease>) {
          check_output_index(ea, ac.index, "min output increase");
          if (!std::isfinite(ac.threshold))
            throw std::invalid_argument("min output increase: non-finite threshold");
          ea.model.restrict_bounds(ea.output_vars[static_cast<std::size_t>(ac.index)],
                                   ea.clean_output(ac.index) + ac.threshold, kInf);
        }
      },
      c);
}

namespace {

LinearExpr perturbation_cost(const EncodedAttack& ea) {
  LinearExpr e;
  for (Index i : ea.pert.allowed) {
    const double w = ea.pert.weights(i);
    const auto& dv = *ea.delta_vars[static_cast<std::size_t>(i)];
    e.add(w, dv.plus).add(w, dv.minus);
  }
  e.normalize();  // zero-weight inputs drop out: freely perturbable
  return e;
}

}  // namespace

void set_objective(EncodedAttack& ea, const ObjectiveKind& kind) {
  ea.model.clear_objectives();
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, MinPerturbation>) {
          ea.hierarchical = false;
          ea.model.add_objective({ObjSense::Minimize, perturbation_cost(ea)});
        } else {
          check_output_index(ea, k.target, "hierarchical objective");
          ea.hierarchical = true;
          LinearExpr out;
          out.add(1.0, ea.output_vars[static_cast<std::size_t>(k.target)]);
          ea.model.add_objective({ObjSense::Maximize, std::move(out)});
          ea.model.add_objective({ObjSense::Minimize, perturbation_cost(ea)});
        }
      },
      kind);
}

LpProblem fix_pattern(const EncodedAttack& ea, const std::vector<std::uint8_t>& pattern) {
  if (static_cast<Index>(pattern.size()) != ea.relu_neuron_count())
    throw std::invalid_argument("fix_pattern: pattern length " +
                                std::to_string(pattern.size()) + " does not match " +
                                std::to_string(ea.relu_neuron_count()) + " neurons");
  FixingsMap fixings;
  std::size_t p = 0;
  for (const auto& layer : ea.relu_vars)
    for (const NeuronVars& v : layer) fixings[v.guard] = pattern[p++] ? 1.0 : 0.0;
  const int obj = ea.model.objectives().empty() ? -1 : 0;
  return build_relaxation(ea.model, ea.bounds, fixings, obj);
}

Eigen::VectorXd decode_delta(const EncodedAttack& ea, const Eigen::VectorXd& solution) {
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(ea.pert.base_input.size());
  for (Index i : ea.pert.allowed) {
    const auto& dv = *ea.delta_vars[static_cast<std::size_t>(i)];
    delta(i) = solution(dv.plus) - solution(dv.minus);
  }
  return delta;
}

Eigen::VectorXd canonicalize_solution(const EncodedAttack& ea, Eigen::VectorXd solution) {
  for (Index i : ea.pert.allowed) {
    const auto& dv = *ea.delta_vars[static_cast<std::size_t>(i)];
    const double pad = std::min(solution(dv.plus), solution(dv.minus));
    if (pad > 0.0) {
      solution(dv.plus) -= pad;
      solution(dv.minus) -= pad;
    }
  }
  return solution;
}

std::optional<BoundsMap> propagate_bounds(const Networkd& net, const EncodedAttack& ea,
                                          FixingsMap& fixings) {
  BoundsMap out;
  for (Index i : ea.pert.allowed) {
    const auto& dv = *ea.delta_vars[static_cast<std::size_t>(i)];
    out[dv.plus] = {0.0, ea.pert.delta_hi(i)};
    out[dv.minus] = {0.0, -ea.pert.delta_lo(i)};
  }

  const auto guard_value = [&](VarId g) -> int {
    if (auto it = fixings.find(g); it != fixings.end())
      return static_cast<int>(std::lround(it->second));
    const VarSpec& spec = ea.model.var(g);
    if (spec.lower == spec.upper) return static_cast<int>(spec.lower);
    return -1;  // free
  };

  const IntervalBoxd box = ea.pert.box();
  Eigen::VectorXd lo = box.lo, hi = box.hi;
  std::size_t relu_layer = 0;
  for (const auto& layer : net.layers) {
    const auto wpos = layer.weights.cwiseMax(0.0);
    const auto wneg = layer.weights.cwiseMin(0.0);
    Eigen::VectorXd pre_lo = wpos * lo + wneg * hi + layer.biases;
    Eigen::VectorXd pre_hi = wpos * hi + wneg * lo + layer.biases;

    if (layer.activation != Activation::ReLU) {
      for (Index i = 0; i < layer.fan_out(); ++i)
        out[ea.output_vars[static_cast<std::size_t>(i)]] = {pre_lo(i), pre_hi(i)};
      lo = pre_lo;
      hi = pre_hi;
      continue;
    }

    const auto& nv = ea.relu_vars[relu_layer++];
    Eigen::VectorXd post_lo(layer.fan_out()), post_hi(layer.fan_out());
    for (Index i = 0; i < layer.fan_out(); ++i) {
      const NeuronVars& v = nv[static_cast<std::size_t>(i)];
      int g = guard_value(v.guard);
      double plo = pre_lo(i), phi = pre_hi(i);
      // The tightened intervals may decide the neuron on their own; record
      // the implied fixing so the branch never wastes a node on it. A pin
      // to inactive requires a strictly negative interval (a zero
      // pre-activation belongs to the active branch).
      if (g < 0 && plo >= 0.0) {
        g = 0;
        fixings[v.guard] = 0.0;
      } else if (g < 0 && phi < 0.0) {
        g = 1;
        fixings[v.guard] = 1.0;
      }
      if (g == 1) {
        // Inactive: the pre-activation must be non-positive.
        if (plo > 0.0) return std::nullopt;
        phi = std::min(phi, 0.0);
        out[v.post] = {0.0, 0.0};
        out[v.slack] = {-phi, -plo};
        post_lo(i) = 0.0;
        post_hi(i) = 0.0;
      } else if (g == 0) {
        // Active: the pre-activation must be non-negative and passes through.
        if (phi < 0.0) return std::nullopt;
        plo = std::max(plo, 0.0);
        out[v.post] = {plo, phi};
        out[v.slack] = {0.0, 0.0};
        post_lo(i) = plo;
        post_hi(i) = phi;
      } else {
        out[v.post] = {std::max(0.0, plo), std::max(0.0, phi)};
        out[v.slack] = {std::max(0.0, -phi), std::max(0.0, -plo)};
        post_lo(i) = std::max(0.0, plo);
        post_hi(i) = std::max(0.0, phi);
      }
    }
    lo = post_lo;
    hi = post_hi;
  }
  return out;
}

}  // namespace relumip
