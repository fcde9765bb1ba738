#include "gtap/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gtap/error.hpp"
#include "gtap/rng.hpp"

namespace gtap {
namespace {

constexpr std::size_t kNpos = static_cast<std::size_t>(-1);

// out[o] = sum_i W[o,i] * in[i] + b[o], summed over i in ascending order.
// Zero inputs are skipped; masked evaluation produces many of them.
void affine(const DenseNetwork& net, std::size_t layer, std::span<const double> in,
            std::vector<double>& out) {
  const std::size_t fan_in = net.fan_in(layer);
  const std::size_t fan_out = net.fan_out(layer);
  const auto w = net.weights(layer);
  const auto b = net.biases(layer);
  thread_local std::vector<std::size_t> active;
  active.clear();
  for (std::size_t i = 0; i < fan_in; ++i) {
    if (in[i] != 0.0) active.push_back(i);
  }
  out.resize(fan_out);
  for (std::size_t o = 0; o < fan_out; ++o) {
    const double* row = w.data() + o * fan_in;
    double sum = 0.0;
    for (std::size_t i : active) sum += row[i] * in[i];
    out[o] = sum + b[o];
  }
}

// ReLU followed by mask zeroing for activation layer `layer`.
void activate(std::vector<double>& act, std::size_t layer, const NeuronMask& layout,
              const Coalition* kept) {
  for (double& a : act) a = a > 0.0 ? a : 0.0;
  if (kept == nullptr || !layout.is_prunable(layer)) return;
  const std::size_t first = layout.id_of({layer, 0});
  for (std::size_t j = 0; j < act.size(); ++j) {
    if (!kept->contains(first + j)) act[j] = 0.0;
  }
}

void softmax_inplace(std::vector<double>& logits) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& z : logits) {
    z = std::exp(z - peak);
    total += z;
  }
  for (double& z : logits) z /= total;
}

// Runs activation layer `from` (already activated and masked) to logits.
void propagate(const DenseNetwork& net, std::size_t from, std::vector<double>& act,
               std::vector<double>& scratch, const NeuronMask& layout,
               const Coalition* kept) {
  const std::size_t n_layers = net.num_weight_layers();
  for (std::size_t l = from; l < n_layers; ++l) {
    affine(net, l, act, scratch);
    std::swap(act, scratch);
    if (l + 1 < n_layers) activate(act, l + 1, layout, kept);
  }
}

void check_input(const DenseNetwork& net, std::span<const double> input) {
  if (input.size() != net.spec().input_size()) {
    throw InvalidArgument("input length " + std::to_string(input.size()) +
                          " does not match network input size " +
                          std::to_string(net.spec().input_size()));
  }
}

}  // namespace

void NetworkSpec::validate() const {
  if (layer_sizes.size() < 3) {
    throw InvalidArgument("network needs input, at least one hidden, and output layer");
  }
  for (std::size_t s : layer_sizes) {
    if (s == 0) throw InvalidArgument("layer sizes must be positive");
  }
}

DenseNetwork::DenseNetwork(NetworkSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), seed_(seed) {
  spec_.validate();
  for (std::size_t l = 0; l < spec_.num_weight_layers(); ++l) {
    weights_.emplace_back(fan_in(l) * fan_out(l), 0.0);
    biases_.emplace_back(fan_out(l), 0.0);
  }
}

DenseNetwork DenseNetwork::glorot(NetworkSpec spec, std::uint64_t seed) {
  DenseNetwork net(std::move(spec), seed);
  const std::uint64_t key = domain_key(seed, RngDomain::kInit);
  for (std::size_t l = 0; l < net.num_weight_layers(); ++l) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(net.fan_in(l) + net.fan_out(l)));
    CounterRng rng(key, static_cast<std::uint32_t>(l), 0);
    for (double& w : net.weights_[l]) w = (2.0 * rng.uniform() - 1.0) * limit;
  }
  return net;
}

std::size_t DenseNetwork::num_weights() const {
  std::size_t total = 0;
  for (const auto& w : weights_) total += w.size();
  return total;
}

std::size_t DenseNetwork::num_parameters() const {
  std::size_t total = num_weights();
  for (const auto& b : biases_) total += b.size();
  return total;
}

bool DenseNetwork::all_finite() const {
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  return std::all_of(weights_.begin(), weights_.end(), finite) &&
         std::all_of(biases_.begin(), biases_.end(), finite);
}

NeuronMask NeuronMask::full(const NetworkSpec& spec, bool include_inputs) {
  spec.validate();
  NeuronMask m;
  m.layer_sizes_ = spec.layer_sizes;
  m.include_inputs_ = include_inputs;
  m.first_id_.assign(spec.layer_sizes.size(), kNpos);
  std::size_t next = 0;
  for (std::size_t layer = include_inputs ? 0 : 1; layer + 1 < spec.layer_sizes.size();
       ++layer) {
    m.first_id_[layer] = next;
    next += spec.layer_sizes[layer];
  }
  m.kept_ = Coalition::grand(next);
  return m;
}

void NeuronMask::mask_out(std::span<const std::size_t> ids) {
  for (std::size_t id : ids) {
    if (id >= size()) throw InvalidArgument("neuron id out of range");
    kept_.erase(id);
  }
}

void NeuronMask::set_kept_set(const Coalition& kept) {
  if (kept.size() != kept_.size()) throw InvalidArgument("kept set size mismatch");
  kept_ = kept;
}

NeuronMask NeuronMask::with_kept(const Coalition& kept) const {
  NeuronMask m = *this;
  m.set_kept_set(kept);
  return m;
}

bool NeuronMask::is_prunable(std::size_t layer) const {
  return layer < first_id_.size() && first_id_[layer] != kNpos;
}

NeuronRef NeuronMask::neuron(std::size_t id) const {
  if (id >= size()) throw InvalidArgument("neuron id out of range");
  for (std::size_t layer = first_id_.size(); layer-- > 0;) {
    if (first_id_[layer] != kNpos && first_id_[layer] <= id) {
      return {layer, id - first_id_[layer]};
    }
  }
  throw InvalidArgument("neuron id out of range");
}

std::size_t NeuronMask::id_of(NeuronRef ref) const {
  if (!is_prunable(ref.layer) || ref.index >= layer_sizes_[ref.layer]) {
    throw InvalidArgument("neuron is not in the prunable universe");
  }
  return first_id_[ref.layer] + ref.index;
}

std::vector<std::size_t> NeuronMask::ids_in_layer(std::size_t layer) const {
  if (!is_prunable(layer)) throw InvalidArgument("layer " + std::to_string(layer) + " is not prunable");
  std::vector<std::size_t> ids(layer_sizes_[layer]);
  for (std::size_t j = 0; j < ids.size(); ++j) ids[j] = first_id_[layer] + j;
  return ids;
}

std::vector<std::size_t> NeuronMask::prunable_layers() const {
  std::vector<std::size_t> layers;
  for (std::size_t layer = 0; layer < first_id_.size(); ++layer) {
    if (first_id_[layer] != kNpos) layers.push_back(layer);
  }
  return layers;
}

bool NeuronMask::compatible(const NetworkSpec& spec) const {
  return spec.layer_sizes == layer_sizes_;
}

std::vector<double> forward_masked(const DenseNetwork& net, std::span<const double> input,
                                   const NeuronMask& mask) {
  check_input(net, input);
  if (!mask.compatible(net.spec())) throw InvalidArgument("mask does not match network");
  std::vector<double> act(input.begin(), input.end());
  if (mask.include_inputs()) {
    for (std::size_t j = 0; j < act.size(); ++j) {
      if (!mask.kept(j)) act[j] = 0.0;
    }
  }
  std::vector<double> scratch;
  propagate(net, 0, act, scratch, mask, &mask.kept_set());
  softmax_inplace(act);
  return act;
}

std::vector<double> forward(const DenseNetwork& net, std::span<const double> input) {
  return forward_masked(net, input, NeuronMask::full(net.spec()));
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

double evaluate_accuracy(const DenseNetwork& net, const NeuronMask& mask,
                         const Dataset& batch) {
  if (batch.empty()) throw InvalidArgument("accuracy of an empty batch");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto probs = forward_masked(net, batch.row(i), mask);
    if (argmax(probs) == static_cast<std::size_t>(batch.labels[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(batch.size());
}

BatchEvaluator::BatchEvaluator(const DenseNetwork& net, const Dataset& batch,
                               bool include_inputs)
    : net_(net), batch_(batch), universe_(NeuronMask::full(net.spec(), include_inputs)) {
  if (batch.empty()) throw InvalidArgument("evaluation batch is empty");
  if (batch.n_features != net.spec().input_size()) {
    throw InvalidArgument("batch feature count does not match network input size");
  }
  if (!include_inputs) {
    const std::size_t width = net.spec().layer_sizes[1];
    first_preactivation_.resize(batch.size() * width);
    std::vector<double> out;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      affine(net, 0, batch.row(i), out);
      std::copy(out.begin(), out.end(), first_preactivation_.begin() + i * width);
    }
  }
}

void BatchEvaluator::logits(std::size_t instance, const Coalition& kept,
                            std::vector<double>& act, std::vector<double>& scratch) const {
  if (kept.size() != universe_.size()) {
    throw InvalidArgument("coalition size does not match the neuron universe");
  }
  if (first_preactivation_.empty()) {
    const auto row = batch_.row(instance);
    act.assign(row.begin(), row.end());
    for (std::size_t j = 0; j < act.size(); ++j) {
      if (!kept.contains(j)) act[j] = 0.0;
    }
    propagate(net_, 0, act, scratch, universe_, &kept);
    return;
  }
  const std::size_t width = net_.spec().layer_sizes[1];
  const auto begin = first_preactivation_.begin() + instance * width;
  act.assign(begin, begin + width);
  if (net_.num_weight_layers() > 1) activate(act, 1, universe_, &kept);
  propagate(net_, 1, act, scratch, universe_, &kept);
}

std::vector<double> BatchEvaluator::probabilities(std::size_t instance,
                                                  const Coalition& kept) const {
  std::vector<double> act, scratch;
  logits(instance, kept, act, scratch);
  softmax_inplace(act);
  return act;
}

double BatchEvaluator::true_class_probability(std::size_t instance,
                                              const Coalition& kept) const {
  return probabilities(instance, kept)[batch_.labels[instance]];
}

bool BatchEvaluator::correct(std::size_t instance, const Coalition& kept) const {
  std::vector<double> act, scratch;
  logits(instance, kept, act, scratch);
  softmax_inplace(act);
  return argmax(act) == static_cast<std::size_t>(batch_.labels[instance]);
}

double BatchEvaluator::accuracy(const Coalition& kept) const {
  std::vector<double> act, scratch;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < batch_.size(); ++i) {
    logits(i, kept, act, scratch);
    softmax_inplace(act);
    if (argmax(act) == static_cast<std::size_t>(batch_.labels[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(batch_.size());
}

double BatchEvaluator::mean_true_class_probability(const Coalition& kept) const {
  std::vector<double> act, scratch;
  double total = 0.0;
  for (std::size_t i = 0; i < batch_.size(); ++i) {
    logits(i, kept, act, scratch);
    softmax_inplace(act);
    total += act[batch_.labels[i]];
  }
  return total / static_cast<double>(batch_.size());
}

}  // namespace gtap
