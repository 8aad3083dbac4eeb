#pragma once
// JSON serialization of networks.
//
// Format:
//   {"input_dim": n,
//    "layers": [{"weights": [[...row...], ...],
//                "biases": [...],
//                "activation": "relu"|"linear"}]}
// weights[i][j] multiplies input j for neuron i; all numbers are finite
// IEEE doubles in decimal text.

#include <iosfwd>
#include <string>

#include "relumip/network.hpp"

namespace relumip {

Networkd load_network(std::istream& in);
Networkd load_network_file(const std::string& path);

void save_network(const Networkd& net, std::ostream& out);
void save_network_file(const Networkd& net, const std::string& path);

}  // namespace relumip
