#pragma once

// The 2-2-2 ReLU network used by the network and uncertainty fixtures, with
// its single evaluation instance x = (1, 0.5).

#include <numeric>
#include <vector>

#include "gtap/dataset.hpp"
#include "gtap/network.hpp"
#include "support/oracles.hpp"

namespace fixture {

inline gtap::DenseNetwork hand_network() {
  gtap::DenseNetwork net(gtap::NetworkSpec{{2, 2, 2}});
  net.weight(0, 0, 0) = 1.0;
  net.weight(0, 0, 1) = -1.0;
  net.weight(0, 1, 0) = 0.5;
  net.weight(0, 1, 1) = 2.0;
  net.biases(0)[1] = -0.5;
  net.weight(1, 0, 0) = 1.0;
  net.weight(1, 0, 1) = 2.0;
  net.weight(1, 1, 0) = -1.0;
  net.weight(1, 1, 1) = 1.0;
  net.biases(1)[0] = 0.1;
  net.biases(1)[1] = -0.1;
  return net;
}

inline gtap::Dataset single_instance(std::int32_t label = 0) {
  gtap::Dataset d;
  d.n_features = 2;
  d.n_classes = 2;
  d.features = {1.0, 0.5};
  d.labels = {label};
  return d;
}

// Population variance of the true-class probability over the four equally
// likely dropout patterns of the two hidden neurons.
inline double enumerated_variance(const gtap::DenseNetwork& net, const gtap::Dataset& d) {
  std::vector<double> t;
  for (int pattern = 0; pattern < 4; ++pattern) {
    const std::vector<std::vector<bool>> zeroed = {{false, false},
                                                   {(pattern & 1) != 0, (pattern & 2) != 0}};
    const std::vector<double> x(d.features.begin(), d.features.end());
    t.push_back(oracle::reference_forward(net, x, zeroed)[d.labels[0]]);
  }
  const double mean = std::accumulate(t.begin(), t.end(), 0.0) / 4.0;
  double v = 0.0;
  for (double x : t) v += (x - mean) * (x - mean) / 4.0;
  return v;
}

}  // namespace fixture
