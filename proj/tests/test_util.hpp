#pragma once
// Shared test helpers. The evaluators here are deliberately independent of
// the library's vectorized code paths so they can serve as oracles.

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "relumip/encoder.hpp"
#include "relumip/network.hpp"
#include "relumip/network_io.hpp"

namespace testutil {

using namespace relumip;

// Plain nested-loop forward evaluation.
inline Eigen::VectorXd loop_eval(const Networkd& net, const Eigen::VectorXd& x0) {
  std::vector<double> cur(static_cast<std::size_t>(x0.size()));
  for (Eigen::Index i = 0; i < x0.size(); ++i) cur[static_cast<std::size_t>(i)] = x0(i);
  for (const auto& layer : net.layers) {
    std::vector<double> next(static_cast<std::size_t>(layer.fan_out()));
    for (Eigen::Index i = 0; i < layer.fan_out(); ++i) {
      double acc = layer.biases(i);
      for (Eigen::Index j = 0; j < layer.fan_in(); ++j)
        acc += layer.weights(i, j) * cur[static_cast<std::size_t>(j)];
      next[static_cast<std::size_t>(i)] =
          layer.activation == Activation::ReLU ? std::max(0.0, acc) : acc;
    }
    cur = std::move(next);
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(cur.size()));
  for (std::size_t i = 0; i < cur.size(); ++i) out(static_cast<Eigen::Index>(i)) = cur[i];
  return out;
}

inline Networkd scalar_net(double w, double b, Activation act = Activation::ReLU) {
  Networkd net;
  net.input_dim = 1;
  Layerd l;
  l.weights = Eigen::MatrixXd::Constant(1, 1, w);
  l.biases = Eigen::VectorXd::Constant(1, b);
  l.activation = act;
  net.layers.push_back(l);
  net.validate();
  return net;
}

// Largest violation of an assignment against the model's constraints,
// indicator semantics, and variable bounds. Walks the model entities
// directly rather than going through any LP machinery.
inline double model_residual(const MilpModel& m, const Eigen::VectorXd& v) {
  const auto eval = [&](const LinearExpr& e) {
    double acc = e.constant;
    for (const auto& t : e.terms) acc += t.coeff * v(t.var);
    return acc;
  };
  const auto row_violation = [&](const Constraint& c) {
    const double lhs = eval(c.expr);
    switch (c.sense) {
      case Sense::Le: return std::max(0.0, lhs - c.rhs);
      case Sense::Ge: return std::max(0.0, c.rhs - lhs);
      case Sense::Eq: return std::abs(lhs - c.rhs);
    }
    return 0.0;
  };
  double worst = 0.0;
  for (const auto& c : m.constraints()) worst = std::max(worst, row_violation(c));
  for (const auto& ic : m.indicators()) {
    const double g = v(ic.guard);
    if (std::abs(g - ic.guard_value) < 0.5)
      worst = std::max(worst, row_violation(ic.implied));
  }
  for (VarId j = 0; j < m.num_vars(); ++j) {
    const auto& spec = m.var(j);
    if (std::isfinite(spec.lower)) worst = std::max(worst, spec.lower - v(j));
    if (std::isfinite(spec.upper)) worst = std::max(worst, v(j) - spec.upper);
  }
  return worst;
}

// The assignment a real forward pass induces on an encoded model: split
// deltas, post-activations, slacks as negative pre-activation parts, guards
// from the sign convention, linear outputs from the final pre-activations.
inline Eigen::VectorXd assignment_from_forward(const EncodedAttack& ea, const Networkd& net,
                                               const Eigen::VectorXd& delta) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(ea.model.num_vars());
  for (Index i : ea.pert.allowed) {
    const auto& dv = *ea.delta_vars[static_cast<std::size_t>(i)];
    v(dv.plus) = std::max(0.0, delta(i));
    v(dv.minus) = std::max(0.0, -delta(i));
  }
  const ForwardTraced trace =
      forward_trace(net, Eigen::VectorXd(ea.pert.base_input + delta));
  std::size_t relu_layer = 0;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    if (net.layers[k].activation == Activation::ReLU) {
      const auto& nv = ea.relu_vars[relu_layer++];
      for (Eigen::Index i = 0; i < trace.pre[k].size(); ++i) {
        const double pre = trace.pre[k](i);
        v(nv[static_cast<std::size_t>(i)].post) = trace.post[k](i);
        v(nv[static_cast<std::size_t>(i)].slack) = std::max(0.0, -pre);
        v(nv[static_cast<std::size_t>(i)].guard) = pre < 0.0 ? 1.0 : 0.0;
      }
    } else {
      for (Eigen::Index i = 0; i < trace.pre[k].size(); ++i)
        v(ea.output_vars[static_cast<std::size_t>(i)]) = trace.pre[k](i);
    }
  }
  return v;
}

inline Eigen::VectorXd random_delta(const PerturbationSpec& p, std::mt19937_64& rng) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(p.base_input.size());
  for (Index i : p.allowed) {
    std::uniform_real_distribution<double> dist(p.delta_lo(i), p.delta_hi(i));
    d(i) = dist(rng);
  }
  return d;
}

inline Networkd parse_net(const std::string& text) {
  std::istringstream in(text);
  return load_network(in);
}

}  // namespace testutil
