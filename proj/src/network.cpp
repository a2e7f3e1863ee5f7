#include "codemix/network.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <Eigen/Dense>

#include "codemix/error.hpp"
#include "codemix/random.hpp"
#include "codemix/text.hpp"

namespace codemix {

std::string_view to_string(Optimizer opt) {
  return opt == Optimizer::Adam ? "adam" : "sgd";
}

Optimizer parse_optimizer(std::string_view text) {
  const std::string lower = ascii_lower(text);
  if (lower == "adam") return Optimizer::Adam;
  if (lower == "sgd") return Optimizer::Sgd;
  throw UsageError("unknown optimizer '" + std::string(text) + "' (expected adam or sgd)");
}

void NetworkConfig::validate() const {
  if (input_dim < 1) throw UsageError("input_dim must be >= 1");
  if (num_layers < 2) throw UsageError("num_layers must be >= 2");
  if (hidden_size < 1) throw UsageError("hidden_size must be >= 1");
  if (output_dim != kOutputDim) throw UsageError("output_dim must be 3");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw UsageError("learning_rate must be positive");
  }
  if (epochs < 1) throw UsageError("epochs must be >= 1");
  if (batch_size < 1) throw UsageError("batch_size must be >= 1");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) throw UsageError("adam_beta1 must be in [0,1)");
  if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) throw UsageError("adam_beta2 must be in [0,1)");
  if (!(adam_epsilon > 0.0)) throw UsageError("adam_epsilon must be positive");
  if (!(l2_weight_decay >= 0.0) || !std::isfinite(l2_weight_decay)) {
    throw UsageError("l2_weight_decay must be non-negative");
  }
}

ExampleRefs refs_of(std::span<const Example> examples) {
  ExampleRefs refs;
  refs.reserve(examples.size());
  for (const auto& e : examples) refs.push_back(&e);
  return refs;
}

Network init_network(const NetworkConfig& config) {
  config.validate();
  Network net;
  net.config = config;
  Rng rng(config.seed);
  for (std::size_t l = 0; l < config.num_layers; ++l) {
    const std::size_t in = l == 0 ? config.input_dim : config.hidden_size;
    const std::size_t out = l + 1 == config.num_layers ? kOutputDim : config.hidden_size;
    LayerParams layer(out, in);
    const double s = std::sqrt(6.0 / static_cast<double>(in + out));
    for (double& w : layer.weights) w = rng.uniform(-s, s);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ConstMatrixMap = Eigen::Map<const Matrix>;
using MatrixMap = Eigen::Map<Matrix>;
using ConstVectorMap = Eigen::Map<const Vector>;
using VectorMap = Eigen::Map<Vector>;

ConstMatrixMap weights_of(const LayerParams& l) {
  return ConstMatrixMap(l.weights.data(), static_cast<Eigen::Index>(l.out_dim),
                        static_cast<Eigen::Index>(l.in_dim));
}
MatrixMap weights_of(LayerParams& l) {
  return MatrixMap(l.weights.data(), static_cast<Eigen::Index>(l.out_dim),
                   static_cast<Eigen::Index>(l.in_dim));
}
ConstVectorMap biases_of(const LayerParams& l) {
  return ConstVectorMap(l.biases.data(), static_cast<Eigen::Index>(l.out_dim));
}
VectorMap biases_of(LayerParams& l) {
  return VectorMap(l.biases.data(), static_cast<Eigen::Index>(l.out_dim));
}

void check_input(const Network& net, std::span<const double> x) {
  if (x.size() != net.config.input_dim) {
    throw DataError("dimension mismatch: network expects " +
                    std::to_string(net.config.input_dim) + " features, got " +
                    std::to_string(x.size()));
  }
}

struct SparseInput {
  std::vector<std::size_t> index;
  std::vector<double> value;
};

// Bag-of-ngram vectors are mostly zero; the first layer only touches the
// columns of non-zero features.
void collect_nonzeros(std::span<const double> x, SparseInput& s) {
  s.index.clear();
  s.value.clear();
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] != 0.0) {
      s.index.push_back(j);
      s.value.push_back(x[j]);
    }
  }
}

// Activations for one minibatch, one column per example.
struct BatchTrace {
  std::vector<SparseInput> inputs;
  std::vector<Matrix> pre;     // pre[l] = W_l h_l + b_l
  std::vector<Matrix> hidden;  // hidden[l] = ReLU(pre[l]), l < M-1
};

template <typename GetX>
void run_forward(const Network& net, std::size_t batch, GetX&& get_x, BatchTrace& t) {
  const std::size_t m = net.layers.size();
  const auto cols = static_cast<Eigen::Index>(batch);
  t.inputs.resize(batch);
  t.pre.resize(m);
  t.hidden.resize(m - 1);

  const LayerParams& first = net.layers[0];
  const auto w0 = weights_of(first);
  Matrix& z0 = t.pre[0];
  z0 = biases_of(first).replicate(1, cols);
  for (std::size_t b = 0; b < batch; ++b) {
    std::span<const double> x = get_x(b);
    check_input(net, x);
    collect_nonzeros(x, t.inputs[b]);
    auto col = z0.col(static_cast<Eigen::Index>(b));
    const SparseInput& in = t.inputs[b];
    for (std::size_t k = 0; k < in.index.size(); ++k) {
      col += in.value[k] * w0.col(static_cast<Eigen::Index>(in.index[k]));
    }
  }

  for (std::size_t l = 1; l < m; ++l) {
    t.hidden[l - 1] = t.pre[l - 1].cwiseMax(0.0);
    t.pre[l].noalias() = weights_of(net.layers[l]) * t.hidden[l - 1];
    t.pre[l].colwise() += biases_of(net.layers[l]);
  }
}

Logits logits_column(const Matrix& out, std::size_t b) {
  Logits l{};
  for (std::size_t k = 0; k < kOutputDim; ++k) {
    l[k] = out(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(b));
  }
  return l;
}

std::vector<LayerParams> zeros_like(const std::vector<LayerParams>& layers) {
  std::vector<LayerParams> out;
  out.reserve(layers.size());
  for (const auto& l : layers) out.emplace_back(l.out_dim, l.in_dim);
  return out;
}

// Reusable gradient storage. First-layer gradients are sparse in the
// columns, so only the columns written by the previous batch are cleared.
struct GradWorkspace {
  std::vector<LayerParams> grads;
  std::vector<std::size_t> touched;
  BatchTrace trace;
};

double accumulate_batch(const Network& net, std::span<const Example* const> batch,
                        GradWorkspace& ws) {
  const std::size_t m = net.layers.size();
  if (ws.grads.empty()) ws.grads = zeros_like(net.layers);

  LayerParams& g0 = ws.grads[0];
  for (std::size_t j : ws.touched) {
    std::fill_n(g0.weights.begin() + static_cast<std::ptrdiff_t>(j * g0.out_dim), g0.out_dim, 0.0);
  }
  ws.touched.clear();
  for (std::size_t l = 1; l < m; ++l) weights_of(ws.grads[l]).setZero();

  BatchTrace& t = ws.trace;
  run_forward(net, batch.size(), [&](std::size_t b) {
    return std::span<const double>(batch[b]->features);
  }, t);

  const double scale = 1.0 / static_cast<double>(batch.size());
  const auto cols = static_cast<Eigen::Index>(batch.size());
  Matrix delta(static_cast<Eigen::Index>(kOutputDim), cols);
  double loss_sum = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Probs probs = softmax(logits_column(t.pre[m - 1], b));
    loss_sum += cross_entropy(probs, batch[b]->label);
    for (std::size_t k = 0; k < kOutputDim; ++k) {
      const double target = k == index_of(batch[b]->label) ? 1.0 : 0.0;
      delta(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(b)) =
          (probs[k] - target) * scale;
    }
  }

  for (std::size_t l = m; l-- > 1;) {
    weights_of(ws.grads[l]).noalias() = delta * t.hidden[l - 1].transpose();
    biases_of(ws.grads[l]) = delta.rowwise().sum();
    Matrix prev = weights_of(net.layers[l]).transpose() * delta;
    // ReLU subgradient, 0 at exactly 0.
    delta = (t.pre[l - 1].array() > 0.0).select(prev, 0.0);
  }

  auto gw0 = weights_of(g0);
  biases_of(g0) = delta.rowwise().sum();
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const SparseInput& in = t.inputs[b];
    const auto d = delta.col(static_cast<Eigen::Index>(b));
    for (std::size_t k = 0; k < in.index.size(); ++k) {
      gw0.col(static_cast<Eigen::Index>(in.index[k])) += in.value[k] * d;
      ws.touched.push_back(in.index[k]);
    }
  }
  std::sort(ws.touched.begin(), ws.touched.end());
  ws.touched.erase(std::unique(ws.touched.begin(), ws.touched.end()), ws.touched.end());
  return loss_sum * scale;
}

// Predicted labels in chunks, reusing one trace.
template <typename GetX, typename Sink>
void predict_many(const Network& net, std::size_t n, GetX&& get_x, Sink&& sink) {
  constexpr std::size_t kChunk = 256;
  BatchTrace t;
  for (std::size_t start = 0; start < n; start += kChunk) {
    const std::size_t len = std::min(kChunk, n - start);
    run_forward(net, len, [&](std::size_t b) { return get_x(start + b); }, t);
    for (std::size_t b = 0; b < len; ++b) sink(start + b, logits_column(t.pre.back(), b));
  }
}

}  // namespace

Logits forward(const Network& net, std::span<const double> x) {
  Logits out{};
  predict_many(net, 1, [&](std::size_t) { return x; },
               [&](std::size_t, const Logits& l) { out = l; });
  return out;
}

Probs softmax(const Logits& logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  Probs p{};
  double sum = 0.0;
  for (std::size_t i = 0; i < kOutputDim; ++i) {
    p[i] = std::exp(logits[i] - top);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

double cross_entropy(const Probs& probs, Label gold) {
  return std::max(0.0, -std::log(std::max(probs[index_of(gold)], 1e-12)));
}

Gradients backward(const Network& net, std::span<const Example* const> batch) {
  if (batch.empty()) throw DataError("backward: empty batch");
  GradWorkspace ws;
  Gradients g;
  g.mean_loss = accumulate_batch(net, batch, ws);
  g.layers = std::move(ws.grads);
  return g;
}

Gradients backward(const Network& net, std::span<const Example> batch) {
  const ExampleRefs refs = refs_of(batch);
  return backward(net, refs);
}

void adam_step(std::vector<LayerParams>& params,
               const std::vector<LayerParams>& grads, AdamState& state,
               const NetworkConfig& config) {
  if (state.first_moment.empty()) {
    state.first_moment = zeros_like(params);
    state.second_moment = zeros_like(params);
    state.step = 0;
  }
  ++state.step;
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(b1, t);
  const double correction2 = 1.0 - std::pow(b2, t);
  const double lr = config.learning_rate;
  const double eps = config.adam_epsilon;
  const double decay = config.l2_weight_decay;
  const double inv_c1 = 1.0 / correction1;
  const double inv_c2 = 1.0 / correction2;

  const auto update = [&](std::vector<double>& p_vec, const std::vector<double>& g_vec,
                          std::vector<double>& m_vec, std::vector<double>& v_vec,
                          double wd) {
    const auto n = static_cast<Eigen::Index>(p_vec.size());
    Eigen::Map<Eigen::ArrayXd> p(p_vec.data(), n), m(m_vec.data(), n), v(v_vec.data(), n);
    const Eigen::Map<const Eigen::ArrayXd> g_raw(g_vec.data(), n);
    const auto g = g_raw + wd * p;
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.square();
    p -= lr * (m * inv_c1) / ((v * inv_c2).sqrt() + eps);
  };

  for (std::size_t l = 0; l < params.size(); ++l) {
    update(params[l].weights, grads[l].weights, state.first_moment[l].weights,
           state.second_moment[l].weights, decay);
    update(params[l].biases, grads[l].biases, state.first_moment[l].biases,
           state.second_moment[l].biases, 0.0);
  }
}

void sgd_step(std::vector<LayerParams>& params,
              const std::vector<LayerParams>& grads,
              const NetworkConfig& config) {
  const double lr = config.learning_rate;
  const double decay = config.l2_weight_decay;
  for (std::size_t l = 0; l < params.size(); ++l) {
    auto& w = params[l].weights;
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * (grads[l].weights[i] + decay * w[i]);
    auto& b = params[l].biases;
    for (std::size_t i = 0; i < b.size(); ++i) b[i] -= lr * grads[l].biases[i];
  }
}

Label argmax_label(const Probs& probs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < kOutputDim; ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return label_from_index(best);
}

Prediction predict(const Network& net, std::span<const double> x) {
  Prediction p;
  p.probs = softmax(forward(net, x));
  p.label = argmax_label(p.probs);
  return p;
}

double accuracy(const Network& net, std::span<const Example* const> examples) {
  if (examples.empty()) return 0.0;
  std::size_t hits = 0;
  predict_many(
      net, examples.size(),
      [&](std::size_t i) { return std::span<const double>(examples[i]->features); },
      [&](std::size_t i, const Logits& l) {
        if (argmax_label(softmax(l)) == examples[i]->label) ++hits;
      });
  return static_cast<double>(hits) / static_cast<double>(examples.size());
}

void TrainReport::write(std::ostream& out) const {
  out << "epoch\ttrain_loss\tval_accuracy\n";
  for (std::size_t e = 0; e < train_loss.size(); ++e) {
    out << e + 1 << '\t' << format_double(train_loss[e]) << '\t'
        << format_double(val_accuracy[e]) << '\n';
  }
  out << "best_epoch=" << best_epoch + 1 << '\n';
}

namespace {

bool all_finite(const std::vector<LayerParams>& layers) {
  for (const auto& l : layers) {
    for (double w : l.weights) if (!std::isfinite(w)) return false;
    for (double b : l.biases) if (!std::isfinite(b)) return false;
  }
  return true;
}

}  // namespace

TrainResult train(std::span<const Example* const> train_set,
                  std::span<const Example* const> val_set,
                  const NetworkConfig& config) {
  config.validate();
  if (train_set.empty()) throw DataError("training set is empty");
  for (const auto* set : {&train_set, &val_set}) {
    for (const Example* ex : *set) {
      if (ex->features.size() != config.input_dim) {
        throw DataError("dimension mismatch: expected " + std::to_string(config.input_dim) +
                        " features, got " + std::to_string(ex->features.size()));
      }
    }
  }

  Network net = init_network(config);
  AdamState adam;
  GradWorkspace ws;
  Rng shuffle_rng(derive_seed(config.seed, 1));
  std::vector<const Example*> order(train_set.begin(), train_set.end());

  TrainResult result;
  double best_acc = -1.0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<const Example*>(order));
    double loss_sum = 0.0;
    for (std::size_t start = 0, batch_no = 0; start < order.size();
         start += config.batch_size, ++batch_no) {
      const std::size_t len = std::min(config.batch_size, order.size() - start);
      const std::span<const Example* const> batch(order.data() + start, len);
      const double batch_loss = accumulate_batch(net, batch, ws);
      if (!std::isfinite(batch_loss)) {
        throw NumericalError("training diverged: non-finite loss at epoch " +
                             std::to_string(epoch + 1) + ", batch " +
                             std::to_string(batch_no + 1));
      }
      loss_sum += batch_loss * static_cast<double>(len);
      if (config.optimizer == Optimizer::Adam) {
        adam_step(net.layers, ws.grads, adam, config);
      } else {
        sgd_step(net.layers, ws.grads, config);
      }
    }
    if (!all_finite(net.layers)) {
      throw NumericalError("training diverged: non-finite parameters after epoch " +
                           std::to_string(epoch + 1));
    }

    const double val_acc = accuracy(net, val_set);
    result.report.train_loss.push_back(loss_sum / static_cast<double>(order.size()));
    result.report.val_accuracy.push_back(val_acc);
    const bool take = val_set.empty() ? true : val_acc > best_acc;
    if (take) {
      best_acc = val_acc;
      result.report.best_epoch = epoch;
      result.network = net;
    }
  }
  return result;
}

TrainResult train(std::span<const Example> train_set,
                  std::span<const Example> val_set, const NetworkConfig& config) {
  const ExampleRefs tr = refs_of(train_set);
  const ExampleRefs va = refs_of(val_set);
  return train(tr, va, config);
}

}  // namespace codemix
