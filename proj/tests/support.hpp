#pragma once

// Test-only helpers: synthetic corpora and reference computations that do
// not share code paths with the library under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "codemix/corpus.hpp"
#include "codemix/network.hpp"
#include "codemix/random.hpp"

namespace codemix::testing {

struct SyntheticSpec {
  std::size_t tweets = 500;
  std::size_t keywords_per_class = 5;
  std::size_t noise_vocab = 40;
  std::size_t min_noise = 2;
  std::size_t max_noise = 6;
  // Probability that a tweet's gold label is replaced by a random one.
  double label_noise = 0.0;
  // Probability that one keyword from another class is mixed in.
  double cross_talk = 0.0;
  std::uint64_t first_id = 1;
};

// Each tweet carries 1-2 keywords from its class family ("neg3", "neu0",
// "pos4", ...) plus uniformly drawn noise words "w<k>", shuffled.
inline Corpus synthetic_corpus(const SyntheticSpec& spec, std::uint64_t seed) {
  static const char* const kPrefix[] = {"neg", "neu", "pos"};
  Rng rng(seed);
  Corpus corpus;
  for (std::size_t i = 0; i < spec.tweets; ++i) {
    const std::size_t cls = rng.uniform_index(kNumLabels);
    ProcessedTweet t;
    t.id = spec.first_id + i;
    const std::size_t n_kw = 1 + rng.uniform_index(2);
    for (std::size_t k = 0; k < n_kw; ++k) {
      t.tokens.push_back(kPrefix[cls] + std::to_string(rng.uniform_index(spec.keywords_per_class)));
    }
    if (rng.uniform01() < spec.cross_talk) {
      const std::size_t other = (cls + 1 + rng.uniform_index(2)) % kNumLabels;
      t.tokens.push_back(kPrefix[other] +
                         std::to_string(rng.uniform_index(spec.keywords_per_class)));
    }
    const std::size_t n_noise =
        spec.min_noise + rng.uniform_index(spec.max_noise - spec.min_noise + 1);
    for (std::size_t k = 0; k < n_noise; ++k) {
      t.tokens.push_back("w" + std::to_string(rng.uniform_index(spec.noise_vocab)));
    }
    rng.shuffle(std::span<std::string>(t.tokens));
    std::size_t label = cls;
    if (rng.uniform01() < spec.label_noise) label = rng.uniform_index(kNumLabels);
    t.label = label_from_index(label);
    corpus.tweets.push_back(std::move(t));
  }
  return corpus;
}

// Plain dense forward pass + cross-entropy, written independently of the
// library's sparse first-layer path.
inline double reference_loss(const Network& net, const std::vector<double>& x, Label gold) {
  std::vector<double> h = x;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const LayerParams& p = net.layers[l];
    std::vector<double> z(p.out_dim);
    for (std::size_t r = 0; r < p.out_dim; ++r) {
      double s = p.biases[r];
      for (std::size_t c = 0; c < p.in_dim; ++c) s += p.w(r, c) * h[c];
      z[r] = s;
    }
    if (l + 1 < net.layers.size()) {
      for (double& v : z) v = v > 0.0 ? v : 0.0;
    }
    h = std::move(z);
  }
  double top = h[0];
  for (double v : h) top = v > top ? v : top;
  double denom = 0.0;
  for (double v : h) denom += std::exp(v - top);
  return -(h[index_of(gold)] - top - std::log(denom));
}

inline double reference_batch_loss(const Network& net, const std::vector<Example>& batch) {
  double s = 0.0;
  for (const auto& e : batch) s += reference_loss(net, e.features, e.label);
  return s / static_cast<double>(batch.size());
}

// Smallest |pre-activation| over all hidden units for input x; finite
// differences are unreliable near ReLU kinks.
inline double min_hidden_margin(const Network& net, const std::vector<double>& x) {
  std::vector<double> h = x;
  double margin = INFINITY;
  for (std::size_t l = 0; l + 1 < net.layers.size(); ++l) {
    const LayerParams& p = net.layers[l];
    std::vector<double> z(p.out_dim);
    for (std::size_t r = 0; r < p.out_dim; ++r) {
      double s = p.biases[r];
      for (std::size_t c = 0; c < p.in_dim; ++c) s += p.w(r, c) * h[c];
      margin = std::min(margin, std::fabs(s));
      z[r] = s > 0.0 ? s : 0.0;
    }
    h = std::move(z);
  }
  return margin;
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t params_checked = 0;
};

// Central differences of reference_batch_loss against backward().
inline GradCheck check_gradients(const Network& net, const std::vector<Example>& batch,
                                 double eps = 1e-5) {
  const Gradients g = backward(net, std::span<const Example>(batch));
  GradCheck out;
  Network probe = net;
  const auto rel = [](double a, double n) {
    return std::fabs(a - n) / std::max({std::fabs(a), std::fabs(n), 1e-6});
  };
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto visit = [&](std::vector<double>& params, const std::vector<double>& analytic) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        const double orig = params[i];
        params[i] = orig + eps;
        const double up = reference_batch_loss(probe, batch);
        params[i] = orig - eps;
        const double down = reference_batch_loss(probe, batch);
        params[i] = orig;
        const double numeric = (up - down) / (2.0 * eps);
        out.max_rel_error = std::max(out.max_rel_error, rel(analytic[i], numeric));
        ++out.params_checked;
      }
    };
    visit(probe.layers[l].weights, g.layers[l].weights);
    visit(probe.layers[l].biases, g.layers[l].biases);
  }
  return out;
}

// Random net with dims <= 8 and a batch whose hidden pre-activations all
// stay at least `margin` away from zero.
struct GradCase {
  Network net;
  std::vector<Example> batch;
};

inline GradCase random_grad_case(Rng& rng, double margin = 1e-3) {
  for (;;) {
    NetworkConfig c;
    c.input_dim = 1 + rng.uniform_index(8);
    c.hidden_size = 1 + rng.uniform_index(8);
    c.num_layers = 2 + rng.uniform_index(3);
    c.seed = rng.next();
    GradCase gc;
    gc.net = init_network(c);
    for (auto& layer : gc.net.layers) {
      for (double& b : layer.biases) b = rng.uniform(-0.5, 0.5);
    }
    const std::size_t n = 1 + rng.uniform_index(3);
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      Example e;
      e.features.resize(c.input_dim);
      for (double& v : e.features) v = rng.uniform(-2.0, 2.0);
      e.label = label_from_index(rng.uniform_index(kNumLabels));
      ok = min_hidden_margin(gc.net, e.features) > margin;
      gc.batch.push_back(std::move(e));
    }
    if (ok) return gc;
  }
}

}  // namespace codemix::testing

#include <array>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "codemix/metrics.hpp"

namespace codemix::testing {

// Brute-force scoring: expands the matrix back into example pairs and
// counts TP/FP/FN per class directly.
struct OracleScores {
  double accuracy = 0.0;
  std::array<double, kNumLabels> precision{}, recall{}, f1{};
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
};

inline OracleScores oracle_scores(const ConfusionMatrix& cm) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t g = 0; g < kNumLabels; ++g) {
    for (std::size_t p = 0; p < kNumLabels; ++p) {
      for (std::size_t k = 0; k < cm.counts[g][p]; ++k) pairs.emplace_back(g, p);
    }
  }
  OracleScores o;
  std::size_t correct = 0;
  for (auto& [g, p] : pairs) correct += g == p;
  o.accuracy = static_cast<double>(correct) / static_cast<double>(pairs.size());
  for (std::size_t c = 0; c < kNumLabels; ++c) {
    std::size_t tp = 0, fp = 0, fn = 0, support = 0;
    for (auto& [g, p] : pairs) {
      if (g == c && p == c) ++tp;
      if (g != c && p == c) ++fp;
      if (g == c && p != c) ++fn;
      if (g == c) ++support;
    }
    o.precision[c] = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    o.recall[c] = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    const double pr = o.precision[c] + o.recall[c];
    o.f1[c] = pr > 0 ? 2 * o.precision[c] * o.recall[c] / pr : 0.0;
    o.macro_f1 += o.f1[c] / 3.0;
    o.weighted_f1 += o.f1[c] * static_cast<double>(support) / static_cast<double>(pairs.size());
  }
  return o;
}

// Independent re-tally of a plurality vote with the documented tie rule.
inline std::pair<Label, std::array<std::size_t, kNumLabels>> oracle_vote(
    const std::vector<Probs>& members) {
  std::array<std::size_t, kNumLabels> votes{};
  std::array<double, kNumLabels> mass{};
  for (const Probs& p : members) {
    std::size_t best = 0;
    if (p[1] > p[best]) best = 1;
    if (p[2] > p[best]) best = 2;
    votes[best] += 1;
    mass[0] += p[0];
    mass[1] += p[1];
    mass[2] += p[2];
  }
  std::size_t most = 0;
  for (std::size_t v : votes) most = v > most ? v : most;
  int winner = -1;
  for (std::size_t c = 0; c < kNumLabels; ++c) {
    if (votes[c] != most) continue;
    if (winner < 0 || mass[c] > mass[static_cast<std::size_t>(winner)]) winner = static_cast<int>(c);
  }
  return {static_cast<Label>(winner), votes};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream(path, std::ios::binary) << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_corpus(const std::filesystem::path& path, const Corpus& c) {
  std::ostringstream s;
  write_simple_format(c, s);
  write_text(path, s.str());
}

// Fresh empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("codemix_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace codemix::testing
