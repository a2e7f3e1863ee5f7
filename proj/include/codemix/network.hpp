#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "codemix/corpus.hpp"
#include "codemix/features.hpp"

namespace codemix {

inline constexpr std::size_t kOutputDim = kNumLabels;

using Logits = std::array<double, kOutputDim>;
using Probs = std::array<double, kOutputDim>;

/// Affine map with an out_dim x in_dim weight matrix. Storage is
/// column-major so one input feature's weights are contiguous; the model
/// file still lists weights row by row.
struct LayerParams {
  std::size_t out_dim = 0;
  std::size_t in_dim = 0;
  std::vector<double> weights;
  std::vector<double> biases;

  LayerParams() = default;
  LayerParams(std::size_t out, std::size_t in)
      : out_dim(out), in_dim(in), weights(out * in, 0.0), biases(out, 0.0) {}

  double& w(std::size_t row, std::size_t col) { return weights[col * out_dim + row]; }
  double w(std::size_t row, std::size_t col) const {
    return weights[col * out_dim + row];
  }

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

enum class Optimizer { Sgd, Adam };

std::string_view to_string(Optimizer opt);
Optimizer parse_optimizer(std::string_view text);

struct NetworkConfig {
  std::size_t input_dim = 1;
  std::size_t num_layers = 2;  // number of affine maps, >= 2
  std::size_t hidden_size = 300;
  std::size_t output_dim = kOutputDim;
  std::uint64_t seed = 0;
  double learning_rate = 1e-3;
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  Optimizer optimizer = Optimizer::Adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double l2_weight_decay = 0.0;

  /// Throws UsageError on any out-of-range field.
  void validate() const;

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

struct Network {
  NetworkConfig config;
  std::vector<LayerParams> layers;

  friend bool operator==(const Network&, const Network&) = default;
};

struct Example {
  FeatureVector features;
  Label label = Label::Neutral;
};

/// Borrowed view of a training set; lets bootstrap resamples share storage.
using ExampleRefs = std::vector<const Example*>;
ExampleRefs refs_of(std::span<const Example> examples);

/// Glorot-uniform weights from a generator seeded with config.seed, zero
/// biases.
Network init_network(const NetworkConfig& config);

/// ReLU hidden layers, linear output.
Logits forward(const Network& net, std::span<const double> x);

/// Max-subtracted, so large logits never overflow.
Probs softmax(const Logits& logits);

/// -log(max(probs[gold], 1e-12)).
double cross_entropy(const Probs& probs, Label gold);

struct Gradients {
  std::vector<LayerParams> layers;
  double mean_loss = 0.0;
};

/// Gradient of the batch-mean cross-entropy with respect to every weight
/// and bias.
Gradients backward(const Network& net, std::span<const Example* const> batch);
Gradients backward(const Network& net, std::span<const Example> batch);

struct AdamState {
  std::vector<LayerParams> first_moment;
  std::vector<LayerParams> second_moment;
  std::uint64_t step = 0;
};

/// Bias-corrected Adam. When l2_weight_decay > 0, decay * weight is added
/// to each weight gradient before the moment updates; biases are not
/// decayed.
void adam_step(std::vector<LayerParams>& params,
               const std::vector<LayerParams>& grads, AdamState& state,
               const NetworkConfig& config);

void sgd_step(std::vector<LayerParams>& params,
              const std::vector<LayerParams>& grads,
              const NetworkConfig& config);

struct Prediction {
  Label label = Label::Negative;
  Probs probs{};
};

/// Argmax with ties going to the lowest canonical index.
Label argmax_label(const Probs& probs);
Prediction predict(const Network& net, std::span<const double> x);

double accuracy(const Network& net, std::span<const Example* const> examples);

struct TrainReport {
  std::vector<double> train_loss;
  std::vector<double> val_accuracy;
  std::size_t best_epoch = 0;

  void write(std::ostream& out) const;
};

struct TrainResult {
  Network network;
  TrainReport report;
};

/// Seeded shuffle, minibatches, optimizer step; returns the parameters from
/// the epoch with the highest validation accuracy (earliest on ties). With
/// an empty validation set every epoch scores 0 and the last epoch is kept.
/// Throws NumericalError when the loss stops being finite.
TrainResult train(std::span<const Example* const> train_set,
                  std::span<const Example* const> val_set,
                  const NetworkConfig& config);
TrainResult train(std::span<const Example> train_set,
                  std::span<const Example> val_set,
                  const NetworkConfig& config);

/// Text model format: "model v1", config key=value lines, then per layer a
/// "layer <i> <out> <in>" line, row-major weights and biases one per line.
void write_model(const Network& net, std::ostream& out);
Network read_model(std::istream& in);

}  // namespace codemix
