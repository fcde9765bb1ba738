#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gtap/dataset.hpp"
#include "gtap/network.hpp"

namespace gtap {

struct Gradients {
  std::vector<std::vector<double>> weights;  // same layout as DenseNetwork
  std::vector<std::vector<double>> biases;

  static Gradients zeros_like(const DenseNetwork& net);
};

// Mean softmax cross-entropy over the given rows, with gradients of that mean.
double loss_and_gradients(const DenseNetwork& net, const Dataset& data,
                          std::span<const std::size_t> rows, Gradients& grads);
double mean_cross_entropy(const DenseNetwork& net, const Dataset& data);

struct TrainParams {
  double learning_rate = 0.05;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  // Inverted dropout on hidden activations during training; 0 disables it.
  double dropout = 0.0;
};

struct TrainLog {
  double initial_loss = 0.0;
  std::vector<double> epoch_loss;  // mean training loss after each epoch
};

// Plain minibatch SGD over seeded per-epoch shuffles. Throws DivergenceError
// on a non-finite loss.
DenseNetwork train(const DenseNetwork& net, const Dataset& data, const TrainParams& params,
                   TrainLog* log = nullptr);

enum class SaliencyKind { kAbsWeight, kWeightTimesGrad };
std::string to_string(SaliencyKind kind);

struct SaliencyScores {
  SaliencyKind kind = SaliencyKind::kAbsWeight;
  // One entry per weight, layers concatenated in order, row-major within.
  std::vector<double> per_weight;
  // One entry per prunable neuron (NeuronMask ids): sum of incoming scores.
  // Input neurons have no incoming weights and use their outgoing scores.
  std::vector<double> per_neuron;
};

SaliencyScores saliency(const DenseNetwork& net, const Dataset& data, SaliencyKind kind,
                        bool include_inputs = false);

}  // namespace gtap
