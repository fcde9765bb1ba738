#include "gtap/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "gtap/error.hpp"
#include "gtap/rng.hpp"

namespace gtap {
namespace {

// Forward pass keeping every activation layer; returns the per-row loss and
// leaves softmax(logits) - onehot(label) in `delta`.
// With `dropout` set, hidden activations are zeroed with probability
// dropout->p and survivors scaled by 1 / (1 - p); the per-unit factors are
// kept for the backward pass.
struct DropoutDraw {
  double p = 0.0;
  CounterRng* rng = nullptr;
  std::vector<std::vector<double>> factor;  // per activation layer
};

double forward_cache(const DenseNetwork& net, std::span<const double> input,
                     std::size_t label, std::vector<std::vector<double>>& acts,
                     std::vector<double>& delta, DropoutDraw* dropout = nullptr) {
  const std::size_t n_layers = net.num_weight_layers();
  acts.resize(n_layers + 1);
  acts[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < n_layers; ++l) {
    const std::size_t fan_in = net.fan_in(l);
    const std::size_t fan_out = net.fan_out(l);
    const auto w = net.weights(l);
    const auto b = net.biases(l);
    const auto& in = acts[l];
    auto& out = acts[l + 1];
    out.resize(fan_out);
    for (std::size_t o = 0; o < fan_out; ++o) {
      const double* row = w.data() + o * fan_in;
      double sum = 0.0;
      for (std::size_t i = 0; i < fan_in; ++i) {
        if (in[i] != 0.0) sum += row[i] * in[i];
      }
      out[o] = sum + b[o];
    }
    if (l + 1 < n_layers) {
      for (double& a : out) a = a > 0.0 ? a : 0.0;
      if (dropout != nullptr) {
        auto& factor = dropout->factor[l + 1];
        factor.resize(fan_out);
        const double scale = 1.0 / (1.0 - dropout->p);
        for (std::size_t o = 0; o < fan_out; ++o) {
          factor[o] = dropout->rng->bernoulli(dropout->p) ? 0.0 : scale;
          out[o] *= factor[o];
        }
      }
    }
  }
  const auto& logits = acts[n_layers];
  double peak = logits[0];
  for (double z : logits) peak = std::max(peak, z);
  double total = 0.0;
  delta.resize(logits.size());
  for (std::size_t c = 0; c < logits.size(); ++c) {
    delta[c] = std::exp(logits[c] - peak);
    total += delta[c];
  }
  for (double& d : delta) d /= total;
  const double loss = std::log(total) + peak - logits[label];
  delta[label] -= 1.0;
  return loss;
}

void accumulate_backward(const DenseNetwork& net, const std::vector<std::vector<double>>& acts,
                         std::vector<double>& delta, std::vector<double>& scratch,
                         Gradients& grads, const DropoutDraw* dropout = nullptr) {
  for (std::size_t l = net.num_weight_layers(); l-- > 0;) {
    const std::size_t fan_in = net.fan_in(l);
    const std::size_t fan_out = net.fan_out(l);
    const auto& in = acts[l];
    auto& gw = grads.weights[l];
    auto& gb = grads.biases[l];
    for (std::size_t o = 0; o < fan_out; ++o) {
      const double d = delta[o];
      gb[o] += d;
      if (d == 0.0) continue;
      double* row = gw.data() + o * fan_in;
      for (std::size_t i = 0; i < fan_in; ++i) {
        if (in[i] != 0.0) row[i] += d * in[i];
      }
    }
    if (l == 0) break;
    const auto w = net.weights(l);
    scratch.assign(fan_in, 0.0);
    for (std::size_t o = 0; o < fan_out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* row = w.data() + o * fan_in;
      for (std::size_t i = 0; i < fan_in; ++i) scratch[i] += row[i] * d;
    }
    // ReLU derivative: zero where the activation was clipped (or exactly 0).
    for (std::size_t i = 0; i < fan_in; ++i) {
      if (!(in[i] > 0.0)) scratch[i] = 0.0;
    }
    if (dropout != nullptr) {
      const auto& factor = dropout->factor[l];
      for (std::size_t i = 0; i < fan_in; ++i) scratch[i] *= factor[i];
    }
    std::swap(delta, scratch);
  }
}

}  // namespace

Gradients Gradients::zeros_like(const DenseNetwork& net) {
  Gradients g;
  for (std::size_t l = 0; l < net.num_weight_layers(); ++l) {
    g.weights.emplace_back(net.weights(l).size(), 0.0);
    g.biases.emplace_back(net.biases(l).size(), 0.0);
  }
  return g;
}

namespace {

// Dropout streams are keyed by (epoch, position within the epoch) so a run
// is reproducible regardless of batch boundaries.
struct DropoutPlan {
  double p = 0.0;
  std::uint64_t key = 0;
  std::uint32_t epoch = 0;
  std::size_t offset = 0;
};

double batch_gradients(const DenseNetwork& net, const Dataset& data,
                       std::span<const std::size_t> rows, Gradients& grads,
                       const DropoutPlan* plan) {
  if (rows.empty()) throw InvalidArgument("gradient over zero rows");
  if (data.n_features != net.spec().input_size()) {
    throw InvalidArgument("dataset feature count does not match network input size");
  }
  grads = Gradients::zeros_like(net);
  std::vector<std::vector<double>> acts;
  std::vector<double> delta, scratch;
  DropoutDraw draw;
  if (plan != nullptr) {
    draw.p = plan->p;
    draw.factor.resize(net.num_weight_layers() + 1);
  }
  double loss = 0.0;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const std::size_t r = rows[j];
    DropoutDraw* d = nullptr;
    std::optional<CounterRng> rng;
    if (plan != nullptr) {
      const std::size_t position = plan->offset + j;
      rng.emplace(plan->key, plan->epoch, static_cast<std::uint32_t>(position));
      draw.rng = &*rng;
      d = &draw;
    }
    loss += forward_cache(net, data.row(r), static_cast<std::size_t>(data.labels[r]), acts,
                          delta, d);
    accumulate_backward(net, acts, delta, scratch, grads, d);
  }
  const double scale = 1.0 / static_cast<double>(rows.size());
  for (auto& g : grads.weights) {
    for (double& x : g) x *= scale;
  }
  for (auto& g : grads.biases) {
    for (double& x : g) x *= scale;
  }
  return loss * scale;
}

}  // namespace

double loss_and_gradients(const DenseNetwork& net, const Dataset& data,
                          std::span<const std::size_t> rows, Gradients& grads) {
  return batch_gradients(net, data, rows, grads, nullptr);
}

double mean_cross_entropy(const DenseNetwork& net, const Dataset& data) {
  if (data.empty()) throw InvalidArgument("cross-entropy of an empty dataset");
  std::vector<std::vector<double>> acts;
  std::vector<double> delta;
  double loss = 0.0;
  for (std::size_t r = 0; r < data.size(); ++r) {
    loss += forward_cache(net, data.row(r), static_cast<std::size_t>(data.labels[r]), acts,
                          delta);
  }
  return loss / static_cast<double>(data.size());
}

DenseNetwork train(const DenseNetwork& initial, const Dataset& data, const TrainParams& params,
                   TrainLog* log) {
  if (data.empty()) throw InvalidArgument("training set is empty");
  data.validate();
  if (data.n_features != initial.spec().input_size()) {
    throw InvalidArgument("dataset feature count does not match network input size");
  }
  if (data.n_classes > initial.spec().output_size()) {
    throw InvalidArgument("dataset has more classes than the network has outputs");
  }
  if (params.batch_size == 0) throw InvalidArgument("batch size must be positive");
  if (!(params.learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
  if (!(params.dropout >= 0.0 && params.dropout < 1.0)) {
    throw InvalidArgument("dropout must lie in [0, 1)");
  }

  DenseNetwork net = initial;
  if (log != nullptr) {
    log->initial_loss = mean_cross_entropy(net, data);
    log->epoch_loss.clear();
  }

  std::vector<std::size_t> order(data.size());
  const std::uint64_t key = domain_key(params.seed, RngDomain::kShuffle);
  const std::uint64_t drop_key = domain_key(params.seed, RngDomain::kDropout);
  Gradients grads;
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    CounterRng rng(key, static_cast<std::uint32_t>(epoch), 0);
    rng.shuffle(order);
    const double lr = params.learning_rate;
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += params.batch_size) {
      const std::size_t end = std::min(order.size(), begin + params.batch_size);
      const std::span<const std::size_t> batch(order.data() + begin, end - begin);
      const DropoutPlan plan{params.dropout, drop_key, static_cast<std::uint32_t>(epoch), begin};
      const double loss =
          batch_gradients(net, data, batch, grads, params.dropout > 0.0 ? &plan : nullptr);
      if (!std::isfinite(loss)) {
        throw DivergenceError("non-finite training loss in epoch " + std::to_string(epoch));
      }
      epoch_loss += loss * static_cast<double>(batch.size());
      for (std::size_t l = 0; l < net.num_weight_layers(); ++l) {
        auto w = net.weights(l);
        auto b = net.biases(l);
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * grads.weights[l][i];
        for (std::size_t i = 0; i < b.size(); ++i) b[i] -= lr * grads.biases[l][i];
      }
    }
    if (!net.all_finite()) {
      throw DivergenceError("non-finite parameters after epoch " + std::to_string(epoch));
    }
    if (log != nullptr) log->epoch_loss.push_back(epoch_loss / static_cast<double>(data.size()));
  }
  return net;
}

std::string to_string(SaliencyKind kind) {
  return kind == SaliencyKind::kAbsWeight ? "abs_weight" : "weight_times_grad";
}

SaliencyScores saliency(const DenseNetwork& net, const Dataset& data, SaliencyKind kind,
                        bool include_inputs) {
  SaliencyScores out;
  out.kind = kind;
  Gradients grads;
  if (kind == SaliencyKind::kWeightTimesGrad) {
    if (data.empty()) throw InvalidArgument("weight-times-gradient saliency needs data");
    std::vector<std::size_t> rows(data.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    loss_and_gradients(net, data, rows, grads);
  }

  std::vector<std::size_t> layer_offset;
  for (std::size_t l = 0; l < net.num_weight_layers(); ++l) {
    layer_offset.push_back(out.per_weight.size());
    const auto w = net.weights(l);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double score = kind == SaliencyKind::kAbsWeight
                               ? std::abs(w[i])
                               : std::abs(w[i] * grads.weights[l][i]);
      if (!std::isfinite(score)) throw DivergenceError("non-finite saliency score");
      out.per_weight.push_back(score);
    }
  }

  const NeuronMask universe = NeuronMask::full(net.spec(), include_inputs);
  out.per_neuron.assign(universe.size(), 0.0);
  for (std::size_t id = 0; id < universe.size(); ++id) {
    const NeuronRef ref = universe.neuron(id);
    double total = 0.0;
    if (ref.layer == 0) {
      // Outgoing column of the first weight layer.
      const std::size_t fan_in = net.fan_in(0);
      for (std::size_t o = 0; o < net.fan_out(0); ++o) {
        total += out.per_weight[layer_offset[0] + o * fan_in + ref.index];
      }
    } else {
      const std::size_t l = ref.layer - 1;
      const std::size_t fan_in = net.fan_in(l);
      const std::size_t base = layer_offset[l] + ref.index * fan_in;
      for (std::size_t i = 0; i < fan_in; ++i) total += out.per_weight[base + i];
    }
    out.per_neuron[id] = total;
  }
  return out;
}

}  // namespace gtap
