#include "codemix/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "codemix/corpus.hpp"
#include "codemix/ensemble.hpp"
#include "codemix/error.hpp"
#include "codemix/features.hpp"
#include "codemix/metrics.hpp"
#include "codemix/network.hpp"
#include "codemix/text.hpp"

namespace fs = std::filesystem;

namespace codemix {
namespace {

// Every key accepted in a config file; each is also a --<key> flag.
const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      // paths
      "conll", "train", "val", "input", "out", "model", "vocab", "stopwords",
      "gold", "pred",
      // features
      "K", "N", "case_fold", "default_stopwords", "mode",
      // network
      "num_layers", "hidden_size", "seed", "learning_rate", "epochs",
      "batch_size", "optimizer", "adam_beta1", "adam_beta2", "adam_epsilon",
      "l2_weight_decay",
      // ensemble / sweep
      "num_bags", "master_seed", "jobs", "axis", "values",
  };
  return keys;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

using Settings = std::map<std::string, std::string>;

Settings read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  const std::set<std::string> keys(known_keys().begin(), known_keys().end());
  Settings s;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    if (!keys.contains(key)) {
      throw UsageError(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    s[key] = trim(std::string_view(body).substr(eq + 1));
  }
  return s;
}

// Typed view over the merged config file + flag settings.
class RunConfig {
 public:
  explicit RunConfig(Settings s) : s_(std::move(s)) {}

  bool has(const std::string& key) const {
    const auto it = s_.find(key);
    return it != s_.end() && !it->second.empty();
  }

  std::string str(const std::string& key, std::string fallback = {}) const {
    return has(key) ? s_.at(key) : fallback;
  }

  std::string required(const std::string& key) const {
    if (!has(key)) throw UsageError("missing required setting '" + key + "'");
    return s_.at(key);
  }

  std::string existing_path(const std::string& key) const {
    const std::string p = required(key);
    if (!fs::exists(p)) throw UsageError(key + ": no such file '" + p + "'");
    return p;
  }

  std::uint64_t u64(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    unsigned long long v = 0;
    if (!parse_u64(s_.at(key), v)) {
      throw UsageError(key + ": expected a non-negative integer, got '" + s_.at(key) + "'");
    }
    return v;
  }

  std::size_t size(const std::string& key, std::size_t fallback) const {
    return static_cast<std::size_t>(u64(key, fallback));
  }

  double real(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    try {
      return parse_double(s_.at(key));
    } catch (const DataError&) {
      throw UsageError(key + ": expected a number, got '" + s_.at(key) + "'");
    }
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = ascii_lower(s_.at(key));
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw UsageError(key + ": expected 0 or 1, got '" + s_.at(key) + "'");
  }

  void set(const std::string& key, std::string value) { s_[key] = std::move(value); }

 private:
  Settings s_;
};

VocabConfig vocab_config(const RunConfig& cfg) {
  VocabConfig vc;
  vc.min_count = cfg.size("K", 1);
  vc.max_order = cfg.size("N", 1);
  vc.case_fold = cfg.flag("case_fold", true);
  if (cfg.flag("default_stopwords", true)) vc.stopwords = default_stopwords();
  if (cfg.has("stopwords")) {
    const std::string path = cfg.existing_path("stopwords");
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open stop-word file '" + path + "'");
    for (auto& w : read_stopwords(in)) vc.stopwords.insert(w);
  }
  vc.validate();
  return vc;
}

NetworkConfig network_config(const RunConfig& cfg, std::size_t input_dim) {
  NetworkConfig nc;
  nc.input_dim = input_dim;
  nc.num_layers = cfg.size("num_layers", nc.num_layers);
  nc.hidden_size = cfg.size("hidden_size", nc.hidden_size);
  nc.seed = cfg.u64("seed", nc.seed);
  nc.learning_rate = cfg.real("learning_rate", nc.learning_rate);
  nc.epochs = cfg.size("epochs", nc.epochs);
  nc.batch_size = cfg.size("batch_size", nc.batch_size);
  nc.optimizer = parse_optimizer(cfg.str("optimizer", "adam"));
  nc.adam_beta1 = cfg.real("adam_beta1", nc.adam_beta1);
  nc.adam_beta2 = cfg.real("adam_beta2", nc.adam_beta2);
  nc.adam_epsilon = cfg.real("adam_epsilon", nc.adam_epsilon);
  nc.l2_weight_decay = cfg.real("l2_weight_decay", nc.l2_weight_decay);
  nc.validate();
  return nc;
}

std::vector<Example> to_examples(const Corpus& corpus, const Vocabulary& vocab,
                                 FeatureMode mode, std::string_view what) {
  std::vector<Example> out;
  out.reserve(corpus.size());
  for (const auto& t : corpus.tweets) {
    if (!t.label) {
      throw DataError(std::string(what) + ": tweet " + std::to_string(t.id) + " has no label");
    }
    out.push_back(Example{vectorize(t, vocab, mode), *t.label});
  }
  return out;
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f%%", 100.0 * fraction);
  return buf;
}

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path.string() + "'");
  body(out);
  out.flush();
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

struct Prepared {
  Corpus train;
  Corpus val;
};

Prepared load_splits(const RunConfig& cfg) {
  Prepared p;
  p.train = load_corpus(cfg.existing_path("train"));
  p.val = load_corpus(cfg.existing_path("val"));
  if (p.train.empty()) throw DataError("training file has no tweets");
  return p;
}

struct Trained {
  Vocabulary vocab;
  FeatureMode mode = FeatureMode::Binary;
  TrainResult result;
  double val_accuracy = 0.0;
};

Trained train_pipeline(const RunConfig& cfg, const Prepared& data) {
  Trained t;
  t.vocab = build_vocabulary(data.train, vocab_config(cfg));
  t.mode = parse_feature_mode(cfg.str("mode", "binary"));
  const auto train_set = to_examples(data.train, t.vocab, t.mode, "train");
  const auto val_set = to_examples(data.val, t.vocab, t.mode, "val");
  t.result = train(train_set, val_set, network_config(cfg, t.vocab.size()));
  const ExampleRefs refs = refs_of(val_set);
  t.val_accuracy = accuracy(t.result.network, refs);
  return t;
}

// ---- subcommands ----

int cmd_convert(const RunConfig& cfg, std::ostream& out) {
  const std::string input = cfg.existing_path("conll");
  const std::string output = cfg.required("out");
  std::ifstream in(input, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + input + "'");
  Corpus corpus;
  try {
    corpus = preprocess_all(parse_conll(in));
  } catch (const DataError& e) {
    throw DataError(input + ": " + e.what());
  }
  write_file(output, [&](std::ostream& os) { write_simple_format(corpus, os); });
  const auto dist = label_distribution(corpus);
  out << "tweets: " << corpus.size() << '\n';
  for (Label l : kAllLabels) out << to_string(l) << ": " << dist[index_of(l)] << '\n';
  return kExitOk;
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
  const fs::path dir = cfg.required("out");
  const Prepared data = load_splits(cfg);
  const Trained t = train_pipeline(cfg, data);

  write_file(dir / "vocab.txt", [&](std::ostream& os) { t.vocab.write(os); });
  write_file(dir / "model.txt", [&](std::ostream& os) { write_model(t.result.network, os); });
  write_file(dir / "train_report.txt", [&](std::ostream& os) {
    os << "feature_mode=" << to_string(t.mode) << '\n'
       << "vocab_size=" << t.vocab.size() << '\n';
    t.result.report.write(os);
  });

  out << "vocabulary: " << t.vocab.size() << " entries\n"
      << "best epoch: " << t.result.report.best_epoch + 1 << '\n'
      << "validation accuracy: " << fixed6(t.val_accuracy) << '\n';
  return kExitOk;
}

int cmd_bag(const RunConfig& cfg, std::ostream& out) {
  const fs::path dir = cfg.required("out");
  const Prepared data = load_splits(cfg);
  const Vocabulary vocab = build_vocabulary(data.train, vocab_config(cfg));
  const FeatureMode mode = parse_feature_mode(cfg.str("mode", "binary"));
  const auto train_set = to_examples(data.train, vocab, mode, "train");
  const auto val_set = to_examples(data.val, vocab, mode, "val");

  EnsembleConfig ec;
  ec.num_bags = cfg.size("num_bags", 10);
  ec.master_seed = cfg.u64("master_seed", 0);
  ec.jobs = cfg.size("jobs", 1);
  ec.base = network_config(cfg, vocab.size());
  const EnsembleResult r = train_ensemble(train_set, val_set, ec);
  const double ens_acc = ensemble_accuracy(r.ensemble, val_set);

  write_file(dir / "vocab.txt", [&](std::ostream& os) { vocab.write(os); });
  save_ensemble(r.ensemble, dir, "vocab.txt", to_string(mode));
  write_file(dir / "report.txt", [&](std::ostream& os) {
    for (std::size_t i = 0; i < r.members.size(); ++i) {
      os << "member_" << i << "_val_accuracy=" << fixed6(r.members[i].val_accuracy) << '\n';
    }
    os << "ensemble_val_accuracy=" << fixed6(ens_acc) << '\n';
  });

  for (std::size_t i = 0; i < r.members.size(); ++i) {
    out << "member " << i << ": validation accuracy " << fixed6(r.members[i].val_accuracy)
        << '\n';
  }
  out << "ensemble: validation accuracy " << fixed6(ens_acc) << '\n';
  return kExitOk;
}

Vocabulary read_vocab_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open vocabulary '" + path.string() + "'");
  try {
    return Vocabulary::read(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

int cmd_predict(const RunConfig& cfg, std::ostream& out) {
  const fs::path model_path = cfg.existing_path("model");
  const Corpus input = load_corpus(cfg.existing_path("input"));
  const std::string output = cfg.required("out");

  std::function<Label(const FeatureVector&)> classify;
  Vocabulary vocab;
  FeatureMode mode;
  Network single;
  LoadedEnsemble loaded;
  std::size_t input_dim = 0;

  if (fs::is_directory(model_path)) {
    loaded = load_ensemble(model_path);
    vocab = read_vocab_file(cfg.has("vocab") ? fs::path(cfg.str("vocab"))
                                             : model_path / loaded.vocab_file);
    mode = parse_feature_mode(cfg.str("mode", loaded.feature_mode));
    input_dim = loaded.ensemble.members.front().config.input_dim;
    classify = [&](const FeatureVector& x) { return predict_vote(loaded.ensemble, x).label; };
  } else {
    std::ifstream in(model_path, std::ios::binary);
    if (!in) throw UsageError("cannot open model '" + model_path.string() + "'");
    single = read_model(in);
    vocab = read_vocab_file(cfg.has("vocab") ? fs::path(cfg.str("vocab"))
                                             : model_path.parent_path() / "vocab.txt");
    mode = parse_feature_mode(cfg.str("mode", "binary"));
    input_dim = single.config.input_dim;
    classify = [&](const FeatureVector& x) { return predict(single, x).label; };
  }
  if (vocab.size() != input_dim) {
    throw DataError("dimension mismatch: vocabulary has " + std::to_string(vocab.size()) +
                    " entries but the model expects " + std::to_string(input_dim));
  }

  write_file(output, [&](std::ostream& os) {
    for (const auto& t : input.tweets) {
      os << t.id << '\t' << to_string(classify(vectorize(t, vocab, mode))) << '\n';
    }
  });
  out << "predicted: " << input.size() << " tweets\n";
  return kExitOk;
}

std::map<std::uint64_t, Label> read_predictions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::map<std::uint64_t, Label> preds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_exact(line, '\t');
    unsigned long long id = 0;
    const auto label = f.size() == 2 ? parse_label(f[1]) : std::nullopt;
    if (f.size() != 2 || !parse_u64(f[0], id) || !label) {
      throw DataError(path + ": line " + std::to_string(line_no) +
                      ": expected 'id<TAB>label', got '" + line + "'");
    }
    if (!preds.emplace(id, *label).second) {
      throw DataError(path + ": line " + std::to_string(line_no) + ": duplicate id " +
                      std::to_string(id));
    }
  }
  return preds;
}

std::string id_list(const std::vector<std::uint64_t>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(ids[i]);
  }
  return s;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  const Corpus gold = load_corpus(cfg.existing_path("gold"));
  const auto preds = read_predictions(cfg.existing_path("pred"));

  std::vector<Label> golds, predicted;
  std::vector<std::uint64_t> missing, extra;
  std::set<std::uint64_t> gold_ids;
  for (const auto& t : gold.tweets) {
    gold_ids.insert(t.id);
    if (!t.label) throw DataError("gold tweet " + std::to_string(t.id) + " has no label");
    const auto it = preds.find(t.id);
    if (it == preds.end()) {
      missing.push_back(t.id);
      continue;
    }
    golds.push_back(*t.label);
    predicted.push_back(it->second);
  }
  for (const auto& [id, label] : preds) {
    if (!gold_ids.contains(id)) extra.push_back(id);
  }
  if (!missing.empty() || !extra.empty()) {
    std::string msg = "prediction ids do not match gold ids";
    if (!missing.empty()) msg += "; missing from predictions: " + id_list(missing);
    if (!extra.empty()) msg += "; not in gold: " + id_list(extra);
    throw DataError(msg);
  }

  const ConfusionMatrix cm = confusion(golds, predicted);
  const MetricsReport r = report(cm);
  write_table(r, cm, out);
  out << '\n';
  write_key_values(r, out);
  if (cfg.has("out")) {
    write_file(cfg.str("out"), [&](std::ostream& os) { write_key_values(r, os); });
  }
  return kExitOk;
}

struct SweepCell {
  std::string value;
  std::size_t vocab_size = 0;
  double val_accuracy = 0.0;
};

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  static const std::map<std::string, std::string> kAxes = {
      {"K", "K"}, {"N", "N"}, {"M", "num_layers"}, {"H", "hidden_size"}, {"mode", "mode"}};
  const std::string axis = cfg.required("axis");
  const auto axis_it = kAxes.find(axis);
  if (axis_it == kAxes.end()) {
    throw UsageError("axis must be one of K, M, H, N, mode; got '" + axis + "'");
  }
  std::vector<std::string> values;
  const std::string value_list = cfg.required("values");
  for (auto v : split_exact(value_list, ',')) {
    const std::string item = trim(v);
    if (item.empty()) throw UsageError("values: empty entry in '" + value_list + "'");
    values.push_back(item);
  }

  const Prepared data = load_splits(cfg);
  std::vector<SweepCell> cells(values.size());
  std::vector<std::exception_ptr> errors(values.size());

  const auto run_cell = [&](std::size_t i) {
    try {
      RunConfig cell_cfg = cfg;
      cell_cfg.set(axis_it->second, values[i]);
      const Trained t = train_pipeline(cell_cfg, data);
      cells[i] = SweepCell{values[i], t.vocab.size(), t.val_accuracy};
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, cfg.size("jobs", 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < values.size(); ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(jobs, values.size()); ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < values.size(); i = next++) run_cell(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!errors[i]) continue;
    const std::string where = "sweep cell " + axis + "=" + values[i] + ": ";
    try {
      std::rethrow_exception(errors[i]);
    } catch (const NumericalError& e) {
      throw NumericalError(where + e.what());
    } catch (const DataError& e) {
      throw DataError(where + e.what());
    } catch (const UsageError& e) {
      throw UsageError(where + e.what());
    }
  }

  std::ostringstream table;
  table << axis << "\tvocab\taccuracy\n";
  for (const auto& c : cells) {
    table << c.value << '\t' << c.vocab_size << '\t' << percent(c.val_accuracy) << '\n';
  }
  std::ostringstream rows;
  for (const auto& c : cells) {
    rows << axis << '=' << c.value << "\tvocab_size=" << c.vocab_size
         << "\tval_accuracy=" << fixed6(c.val_accuracy) << '\n';
  }
  out << table.str() << '\n' << rows.str();
  if (cfg.has("out")) {
    write_file(cfg.str("out"), [&](std::ostream& os) { os << rows.str(); });
  }
  return kExitOk;
}

struct Command {
  std::string name;
  std::string help;
  std::vector<std::string> positionals;  // keys filled by positional args
  std::function<int(const RunConfig&, std::ostream&)> run;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const std::vector<Command> commands = {
      {"convert", "Convert a CoNLL file to the simple tab-separated format",
       {"conll", "out"}, cmd_convert},
      {"train", "Build a vocabulary and train one classifier", {}, cmd_train},
      {"bag", "Train a bagged ensemble with plurality voting", {}, cmd_bag},
      {"predict", "Label tweets with a model file or ensemble directory", {}, cmd_predict},
      {"evaluate", "Score predictions against gold labels", {"gold", "pred"}, cmd_evaluate},
      {"sweep", "Train one model per value of a single hyperparameter", {}, cmd_sweep},
  };

  CLI::App app{"Bag-of-ngrams sentiment classifiers for code-mixed tweets", "codemix"};
  app.require_subcommand(1);

  struct Bound {
    CLI::App* sub;
    std::map<std::string, std::string> flags;
    std::vector<std::string> positional_values;
    std::string config_path;
  };
  std::vector<Bound> bound(commands.size());

  for (std::size_t c = 0; c < commands.size(); ++c) {
    Bound& b = bound[c];
    b.sub = app.add_subcommand(commands[c].name, commands[c].help);
    b.sub->add_option("--config", b.config_path, "key=value settings file");
    for (const auto& key : known_keys()) {
      b.sub->add_option("--" + key, b.flags[key])
          ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    }
    if (!commands[c].positionals.empty()) {
      b.sub->add_option("args", b.positional_values)
          ->expected(0, static_cast<int>(commands[c].positionals.size()));
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  for (std::size_t c = 0; c < commands.size(); ++c) {
    Bound& b = bound[c];
    if (!b.sub->parsed()) continue;
    try {
      Settings settings;
      if (!b.config_path.empty()) settings = read_config_file(b.config_path);
      for (std::size_t i = 0; i < b.positional_values.size(); ++i) {
        settings[commands[c].positionals[i]] = b.positional_values[i];
      }
      for (const auto& [key, value] : b.flags) {
        if (b.sub->count("--" + key) > 0) settings[key] = value;
      }
      return commands[c].run(RunConfig(std::move(settings)), out);
    } catch (const UsageError& e) {
      err << "error: " << e.what() << '\n';
      return kExitUsage;
    } catch (const DataError& e) {
      err << "error: " << e.what() << '\n';
      return kExitData;
    } catch (const NumericalError& e) {
      err << "error: " << e.what() << '\n';
      return kExitNumerical;
    } catch (const fs::filesystem_error& e) {
      err << "error: " << e.what() << '\n';
      return kExitUsage;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitData;
    }
  }
  return kExitUsage;
}

}  // namespace codemix
