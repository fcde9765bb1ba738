#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gtap/coalition.hpp"
#include "gtap/dataset.hpp"

namespace gtap {

// Layer widths [input, hidden..., output]. Hidden layers use ReLU; the output
// layer produces logits for softmax cross-entropy.
struct NetworkSpec {
  std::vector<std::size_t> layer_sizes;

  void validate() const;
  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t output_size() const { return layer_sizes.back(); }
  std::size_t num_weight_layers() const { return layer_sizes.size() - 1; }

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

// Fully connected ReLU network. Weight layer l maps activation layer l to
// l + 1 and is stored row-major with shape (fan_out x fan_in).
class DenseNetwork {
 public:
  DenseNetwork() = default;
  // All parameters zero.
  explicit DenseNetwork(NetworkSpec spec, std::uint64_t seed = 0);
  // Uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  static DenseNetwork glorot(NetworkSpec spec, std::uint64_t seed);

  const NetworkSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t num_weight_layers() const { return weights_.size(); }
  std::size_t fan_in(std::size_t layer) const { return spec_.layer_sizes[layer]; }
  std::size_t fan_out(std::size_t layer) const { return spec_.layer_sizes[layer + 1]; }

  std::span<double> weights(std::size_t layer) { return weights_[layer]; }
  std::span<const double> weights(std::size_t layer) const { return weights_[layer]; }
  std::span<double> biases(std::size_t layer) { return biases_[layer]; }
  std::span<const double> biases(std::size_t layer) const { return biases_[layer]; }

  double& weight(std::size_t layer, std::size_t out, std::size_t in) {
    return weights_[layer][out * fan_in(layer) + in];
  }
  double weight(std::size_t layer, std::size_t out, std::size_t in) const {
    return weights_[layer][out * fan_in(layer) + in];
  }

  std::size_t num_weights() const;
  std::size_t num_parameters() const;
  bool all_finite() const;

  friend bool operator==(const DenseNetwork&, const DenseNetwork&) = default;

 private:
  NetworkSpec spec_;
  std::uint64_t seed_ = 0;
  std::vector<std::vector<double>> weights_;
  std::vector<std::vector<double>> biases_;
};

// Activation-layer coordinates of a neuron; layer 0 is the input layer.
struct NeuronRef {
  std::size_t layer = 0;
  std::size_t index = 0;
  friend bool operator==(const NeuronRef&, const NeuronRef&) = default;
};

// The prunable-neuron universe of a network plus the currently kept subset.
// Ids enumerate (optionally) input neurons, then hidden layers in order;
// output neurons are never prunable.
class NeuronMask {
 public:
  NeuronMask() = default;
  static NeuronMask full(const NetworkSpec& spec, bool include_inputs = false);

  std::size_t size() const { return kept_.size(); }
  bool include_inputs() const { return include_inputs_; }
  std::size_t kept_count() const { return kept_.cardinality(); }

  bool kept(std::size_t id) const { return kept_.contains(id); }
  void set_kept(std::size_t id, bool keep) { kept_.set(id, keep); }
  // Union semantics: masking A then B equals masking A | B.
  void mask_out(std::span<const std::size_t> ids);

  const Coalition& kept_set() const { return kept_; }
  void set_kept_set(const Coalition& kept);
  NeuronMask with_kept(const Coalition& kept) const;

  NeuronRef neuron(std::size_t id) const;
  std::size_t id_of(NeuronRef ref) const;
  bool is_prunable(std::size_t layer) const;
  std::size_t layer_of(std::size_t id) const { return neuron(id).layer; }
  std::vector<std::size_t> ids_in_layer(std::size_t layer) const;
  // Activation layers that contribute prunable neurons, ascending.
  std::vector<std::size_t> prunable_layers() const;

  // Same layer layout as spec (mask built for this architecture).
  bool compatible(const NetworkSpec& spec) const;

  friend bool operator==(const NeuronMask&, const NeuronMask&) = default;

 private:
  std::vector<std::size_t> layer_sizes_;
  bool include_inputs_ = false;
  std::vector<std::size_t> first_id_;  // per activation layer; npos if not prunable
  Coalition kept_;
};

// Softmax class probabilities with masked neurons' post-activation output
// forced to zero.
std::vector<double> forward_masked(const DenseNetwork& net, std::span<const double> input,
                                   const NeuronMask& mask);
std::vector<double> forward(const DenseNetwork& net, std::span<const double> input);

// Index of the largest probability; ties go to the lowest class.
std::size_t argmax(std::span<const double> values);

// Fraction of rows whose argmax matches the label.
double evaluate_accuracy(const DenseNetwork& net, const NeuronMask& mask,
                         const Dataset& batch);

// Repeated masked evaluation on one fixed batch. When inputs are not
// prunable, the first hidden layer's pre-activations do not depend on the
// mask and are computed once. Results are bit-identical to forward_masked.
// Holds references: net and batch must outlive the evaluator.
class BatchEvaluator {
 public:
  BatchEvaluator(const DenseNetwork& net, const Dataset& batch, bool include_inputs = false);

  const NeuronMask& universe() const { return universe_; }
  std::size_t num_neurons() const { return universe_.size(); }
  std::size_t batch_size() const { return batch_.size(); }
  const Dataset& batch() const { return batch_; }
  const DenseNetwork& network() const { return net_; }

  double accuracy(const Coalition& kept) const;
  // Mean probability assigned to the true class over the batch.
  double mean_true_class_probability(const Coalition& kept) const;
  std::vector<double> probabilities(std::size_t instance, const Coalition& kept) const;
  double true_class_probability(std::size_t instance, const Coalition& kept) const;
  bool correct(std::size_t instance, const Coalition& kept) const;

 private:
  void logits(std::size_t instance, const Coalition& kept, std::vector<double>& act,
              std::vector<double>& scratch) const;

  const DenseNetwork& net_;
  const Dataset& batch_;
  NeuronMask universe_;
  std::vector<double> first_preactivation_;  // batch x layer_sizes[1]; empty if inputs prunable
};

}  // namespace gtap
