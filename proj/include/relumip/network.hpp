#pragma once
// Feed-forward fully-connected networks with ReLU/linear activations:
// representation, forward evaluation, activation patterns, and interval
// propagation of pre-activation bounds.

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace relumip {

using Index = Eigen::Index;

enum class Activation { ReLU, Linear };

/// Dense affine layer followed by an elementwise activation.
/// weights(i, j) multiplies input j for neuron i.
template <typename Scalar>
struct Layer {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix weights;
  Vector biases;
  Activation activation = Activation::ReLU;

  Index fan_in() const { return weights.cols(); }
  Index fan_out() const { return weights.rows(); }
};

/// Layered network. Hidden layers are ReLU; only the last layer may be
/// Linear. Immutable by convention once validated; nothing in this module
/// mutates a network after construction.
template <typename Scalar>
struct Network {
  using Vector = typename Layer<Scalar>::Vector;

  Index input_dim = 0;
  std::vector<Layer<Scalar>> layers;

  Index depth() const { return static_cast<Index>(layers.size()); }
  Index output_dim() const { return layers.back().fan_out(); }

  /// Number of neurons governed by a ReLU activation, across all layers.
  Index relu_neuron_count() const {
    Index n = 0;
    for (const auto& l : layers)
      if (l.activation == Activation::ReLU) n += l.fan_out();
    return n;
  }

  void validate() const;
};

/// Per-dimension closed interval bounds, lo <= hi everywhere.
template <typename Scalar>
struct IntervalBox {
  using Vector = typename Layer<Scalar>::Vector;

  Vector lo;
  Vector hi;

  Index dim() const { return lo.size(); }
};

/// Pre-activation intervals for one layer, from interval propagation.
template <typename Scalar>
struct LayerIntervals {
  using Vector = typename Layer<Scalar>::Vector;

  Vector pre_lo;
  Vector pre_hi;
};

/// Pre- and post-activation values per layer for one input.
template <typename Scalar>
struct ForwardTrace {
  using Vector = typename Layer<Scalar>::Vector;

  std::vector<Vector> pre;
  std::vector<Vector> post;  // post.back() is the network output
};

namespace detail {

inline std::string layer_label(std::size_t k) {
  return "layer " + std::to_string(k + 1);
}

}  // namespace detail

template <typename Scalar>
void Network<Scalar>::validate() const {
  if (input_dim < 1) throw std::invalid_argument("network: input_dim must be >= 1");
  if (layers.empty()) throw std::invalid_argument("network: at least one layer required");
  Index prev = input_dim;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    const std::string where = detail::layer_label(k);
    if (l.weights.rows() < 1)
      throw std::invalid_argument(where + ": empty weight matrix");
    if (l.weights.cols() != prev)
      throw std::invalid_argument(where + ": weight matrix has " +
                                  std::to_string(l.weights.cols()) +
                                  " columns but previous width is " +
                                  std::to_string(prev));
    if (l.biases.size() != l.weights.rows())
      throw std::invalid_argument(where + ": bias length " +
                                  std::to_string(l.biases.size()) +
                                  " does not match " +
                                  std::to_string(l.weights.rows()) + " neurons");
    if (!l.weights.allFinite() || !l.biases.allFinite())
      throw std::invalid_argument(where + ": non-finite entry");
    if (l.activation == Activation::Linear && k + 1 != layers.size())
      throw std::invalid_argument(where + ": only the final layer may be linear");
    prev = l.weights.rows();
  }
}

/// Full forward pass keeping every layer's pre- and post-activation values.
template <typename Scalar>
ForwardTrace<Scalar> forward_trace(const Network<Scalar>& net,
                                   const Eigen::Ref<const typename Layer<Scalar>::Vector>& x) {
  if (x.size() != net.input_dim)
    throw std::invalid_argument("forward: input has dimension " +
                                std::to_string(x.size()) + ", expected " +
                                std::to_string(net.input_dim));
  ForwardTrace<Scalar> t;
  t.pre.reserve(net.layers.size());
  t.post.reserve(net.layers.size());
  typename Layer<Scalar>::Vector cur = x;
  for (const auto& l : net.layers) {
    typename Layer<Scalar>::Vector pre = l.weights * cur + l.biases;
    typename Layer<Scalar>::Vector post =
        l.activation == Activation::ReLU ? pre.cwiseMax(Scalar(0)).eval() : pre;
    t.pre.push_back(pre);
    t.post.push_back(post);
    cur = post;
  }
  return t;
}

template <typename Scalar>
typename Layer<Scalar>::Vector forward(const Network<Scalar>& net,
                                       const Eigen::Ref<const typename Layer<Scalar>::Vector>& x) {
  return forward_trace(net, x).post.back();
}

/// Binary vector over ReLU neurons in layer order: 1 iff the neuron's
/// pre-activation is strictly negative (a pre-activation of exactly 0 maps
/// to 0, the active branch).
template <typename Scalar>
std::vector<std::uint8_t> activation_pattern(
    const Network<Scalar>& net,
    const Eigen::Ref<const typename Layer<Scalar>::Vector>& x) {
  const ForwardTrace<Scalar> t = forward_trace(net, x);
  std::vector<std::uint8_t> pattern;
  pattern.reserve(static_cast<std::size_t>(net.relu_neuron_count()));
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    if (net.layers[k].activation != Activation::ReLU) continue;
    for (Index i = 0; i < t.pre[k].size(); ++i)
      pattern.push_back(t.pre[k](i) < Scalar(0) ? 1 : 0);
  }
  return pattern;
}

/// Layer-by-layer interval propagation over an input box. The returned
/// pre-activation intervals are sound over-approximations of what any input
/// in the box can reach. Used downstream to size big-M constants.
template <typename Scalar>
std::vector<LayerIntervals<Scalar>> interval_bounds(const Network<Scalar>& net,
                                                    const IntervalBox<Scalar>& box) {
  using Vector = typename Layer<Scalar>::Vector;
  if (box.dim() != net.input_dim)
    throw std::invalid_argument("interval_bounds: box has dimension " +
                                std::to_string(box.dim()) + ", expected " +
                                std::to_string(net.input_dim));
  if ((box.lo.array() > box.hi.array()).any())
    throw std::invalid_argument("interval_bounds: box has lo > hi");

  std::vector<LayerIntervals<Scalar>> out;
  out.reserve(net.layers.size());
  Vector lo = box.lo, hi = box.hi;
  for (const auto& l : net.layers) {
    const auto wpos = l.weights.cwiseMax(Scalar(0));
    const auto wneg = l.weights.cwiseMin(Scalar(0));
    Vector pre_lo = wpos * lo + wneg * hi + l.biases;
    Vector pre_hi = wpos * hi + wneg * lo + l.biases;
    out.push_back({pre_lo, pre_hi});
    if (l.activation == Activation::ReLU) {
      lo = pre_lo.cwiseMax(Scalar(0));
      hi = pre_hi.cwiseMax(Scalar(0));
    } else {
      lo = pre_lo;
      hi = pre_hi;
    }
  }
  return out;
}

using Layerd = Layer<double>;
using Networkd = Network<double>;
using IntervalBoxd = IntervalBox<double>;
using LayerIntervalsd = LayerIntervals<double>;
using ForwardTraced = ForwardTrace<double>;

/// Reproducible random fixture network: weights uniform in [-1, 1], biases
/// in [-0.5, 0.5], drawn row by row from a seeded mt19937_64. `widths` lists
/// input, hidden..., output sizes.
Networkd make_random_network(const std::vector<Index>& widths, std::uint64_t seed,
                             Activation final_activation = Activation::ReLU);

}  // namespace relumip
