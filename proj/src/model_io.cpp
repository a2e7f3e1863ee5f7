#include <istream>
#include <map>
#include <ostream>
#include <string>

#include "codemix/error.hpp"
#include "codemix/network.hpp"
#include "codemix/text.hpp"

namespace codemix {

void write_model(const Network& net, std::ostream& out) {
  const NetworkConfig& c = net.config;
  out << "model v1\n"
      << "input_dim=" << c.input_dim << '\n'
      << "num_layers=" << c.num_layers << '\n'
      << "hidden_size=" << c.hidden_size << '\n'
      << "output_dim=" << c.output_dim << '\n'
      << "seed=" << c.seed << '\n'
      << "learning_rate=" << format_double(c.learning_rate) << '\n'
      << "epochs=" << c.epochs << '\n'
      << "batch_size=" << c.batch_size << '\n'
      << "optimizer=" << to_string(c.optimizer) << '\n'
      << "adam_beta1=" << format_double(c.adam_beta1) << '\n'
      << "adam_beta2=" << format_double(c.adam_beta2) << '\n'
      << "adam_epsilon=" << format_double(c.adam_epsilon) << '\n'
      << "l2_weight_decay=" << format_double(c.l2_weight_decay) << '\n';
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const LayerParams& layer = net.layers[l];
    out << "layer " << l + 1 << ' ' << layer.out_dim << ' ' << layer.in_dim << '\n';
    for (std::size_t r = 0; r < layer.out_dim; ++r) {
      for (std::size_t c = 0; c < layer.in_dim; ++c) out << format_double(layer.w(r, c)) << '\n';
    }
    for (double b : layer.biases) out << format_double(b) << '\n';
  }
  if (!out) throw DataError("failed writing model");
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::string next(std::string_view what) {
    std::string line;
    if (!std::getline(in_, line)) {
      throw DataError("model: unexpected end of file, expected " + std::string(what));
    }
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  [[noreturn]] void fail(std::string_view what, std::string_view line) const {
    throw DataError("model line " + std::to_string(line_no_) + ": " + std::string(what) +
                    ": '" + std::string(line) + "'");
  }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

std::size_t to_size(LineReader& r, std::string_view text, std::string_view line) {
  unsigned long long v = 0;
  if (!parse_u64(text, v)) r.fail("expected a non-negative integer", line);
  return static_cast<std::size_t>(v);
}

double to_double(LineReader& r, std::string_view text, std::string_view line) {
  try {
    return parse_double(text);
  } catch (const DataError&) {
    r.fail("expected a number", line);
  }
}

}  // namespace

Network read_model(std::istream& in) {
  LineReader reader(in);
  const std::string header = reader.next("header");
  if (header != "model v1") reader.fail("bad header", header);

  static const char* const kKeys[] = {
      "input_dim", "num_layers", "hidden_size", "output_dim", "seed",
      "learning_rate", "epochs", "batch_size", "optimizer", "adam_beta1",
      "adam_beta2", "adam_epsilon", "l2_weight_decay"};
  std::map<std::string, std::string> kv;
  for (const char* key : kKeys) {
    const std::string line = reader.next(key);
    const auto eq = line.find('=');
    if (eq == std::string::npos || line.substr(0, eq) != key) {
      reader.fail(std::string("expected key ") + key, line);
    }
    kv[key] = line.substr(eq + 1);
  }

  Network net;
  NetworkConfig& c = net.config;
  const auto sz = [&](const char* k) { return to_size(reader, kv[k], kv[k]); };
  const auto dbl = [&](const char* k) { return to_double(reader, kv[k], kv[k]); };
  c.input_dim = sz("input_dim");
  c.num_layers = sz("num_layers");
  c.hidden_size = sz("hidden_size");
  c.output_dim = sz("output_dim");
  unsigned long long seed = 0;
  if (!parse_u64(kv["seed"], seed)) reader.fail("bad seed", kv["seed"]);
  c.seed = seed;
  c.learning_rate = dbl("learning_rate");
  c.epochs = sz("epochs");
  c.batch_size = sz("batch_size");
  try {
    c.optimizer = parse_optimizer(kv["optimizer"]);
    c.adam_beta1 = dbl("adam_beta1");
    c.adam_beta2 = dbl("adam_beta2");
    c.adam_epsilon = dbl("adam_epsilon");
    c.l2_weight_decay = dbl("l2_weight_decay");
    c.validate();
  } catch (const UsageError& e) {
    throw DataError(std::string("model: invalid config: ") + e.what());
  }

  for (std::size_t l = 0; l < c.num_layers; ++l) {
    const std::string line = reader.next("layer header");
    const auto f = split_exact(line, ' ');
    if (f.size() != 4 || f[0] != "layer" || to_size(reader, f[1], line) != l + 1) {
      reader.fail("expected 'layer " + std::to_string(l + 1) + " <out> <in>'", line);
    }
    const std::size_t out = to_size(reader, f[2], line);
    const std::size_t in_dim = to_size(reader, f[3], line);
    const std::size_t want_in = l == 0 ? c.input_dim : c.hidden_size;
    const std::size_t want_out = l + 1 == c.num_layers ? kOutputDim : c.hidden_size;
    if (out != want_out || in_dim != want_in) reader.fail("layer shape disagrees with config", line);

    LayerParams layer(out, in_dim);
    for (std::size_t r = 0; r < out; ++r) {
      for (std::size_t col = 0; col < in_dim; ++col) {
        const std::string v = reader.next("weight");
        layer.w(r, col) = to_double(reader, v, v);
      }
    }
    for (double& b : layer.biases) {
      const std::string v = reader.next("bias");
      b = to_double(reader, v, v);
    }
    net.layers.push_back(std::move(layer));
  }
  return net;
}

}  // namespace codemix
