#include "relumip/network_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

namespace relumip {

namespace {

using nlohmann::json;

Activation activation_from_string(const std::string& s, std::size_t layer) {
  if (s == "relu") return Activation::ReLU;
  if (s == "linear") return Activation::Linear;
  throw std::invalid_argument(detail::layer_label(layer) +
                              ": unknown activation \"" + s + "\"");
}

const char* activation_to_string(Activation a) {
  return a == Activation::ReLU ? "relu" : "linear";
}

}  // namespace

Networkd load_network(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("network: JSON parse failure: ") + e.what());
  }

  Networkd net;
  try {
    net.input_dim = doc.at("input_dim").get<Index>();
    const json& layers = doc.at("layers");
    if (!layers.is_array())
      throw std::invalid_argument("network: \"layers\" must be an array");
    for (std::size_t k = 0; k < layers.size(); ++k) {
      const json& jl = layers[k];
      const auto rows = jl.at("weights").get<std::vector<std::vector<double>>>();
      const auto biases = jl.at("biases").get<std::vector<double>>();
      if (rows.empty())
        throw std::invalid_argument(detail::layer_label(k) + ": empty weight matrix");
      Layerd layer;
      layer.weights.resize(static_cast<Index>(rows.size()),
                           static_cast<Index>(rows[0].size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size())
          throw std::invalid_argument(detail::layer_label(k) +
                                      ": ragged weight matrix at row " +
                                      std::to_string(i));
        for (std::size_t j = 0; j < rows[i].size(); ++j)
          layer.weights(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
      }
      layer.biases = Eigen::Map<const Eigen::VectorXd>(biases.data(),
                                                       static_cast<Index>(biases.size()));
      layer.activation = activation_from_string(jl.at("activation").get<std::string>(), k);
      net.layers.push_back(std::move(layer));
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("network: malformed document: ") + e.what());
  }

  net.validate();
  return net;
}

Networkd load_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open network file: " + path);
  return load_network(in);
}

void save_network(const Networkd& net, std::ostream& out) {
  json layers = json::array();
  for (const auto& l : net.layers) {
    json rows = json::array();
    for (Index i = 0; i < l.weights.rows(); ++i) {
      json row = json::array();
      for (Index j = 0; j < l.weights.cols(); ++j) row.push_back(l.weights(i, j));
      rows.push_back(std::move(row));
    }
    json biases = json::array();
    for (Index i = 0; i < l.biases.size(); ++i) biases.push_back(l.biases(i));
    layers.push_back({{"weights", std::move(rows)},
                      {"biases", std::move(biases)},
                      {"activation", activation_to_string(l.activation)}});
  }
  json doc{{"input_dim", net.input_dim}, {"layers", std::move(layers)}};
  out << doc.dump(2) << '\n';
}

void save_network_file(const Networkd& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open network file for writing: " + path);
  save_network(net, out);
}

Networkd make_random_network(const std::vector<Index>& widths, std::uint64_t seed,
                             Activation final_activation) {
  if (widths.size() < 2)
    throw std::invalid_argument("random network: need at least input and output widths");
  for (Index w : widths)
    if (w < 1) throw std::invalid_argument("random network: widths must be >= 1");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> wdist(-1.0, 1.0);
  std::uniform_real_distribution<double> bdist(-0.5, 0.5);

  Networkd net;
  net.input_dim = widths[0];
  for (std::size_t k = 1; k < widths.size(); ++k) {
    Layerd layer;
    layer.weights.resize(widths[k], widths[k - 1]);
    layer.biases.resize(widths[k]);
    for (Index i = 0; i < layer.weights.rows(); ++i)
      for (Index j = 0; j < layer.weights.cols(); ++j) layer.weights(i, j) = wdist(rng);
    for (Index i = 0; i < layer.biases.size(); ++i) layer.biases(i) = bdist(rng);
    layer.activation =
        (k + 1 == widths.size()) ? final_activation : Activation::ReLU;
    net.layers.push_back(std::move(layer));
  }
  net.validate();
  return net;
}

}  // namespace relumip
