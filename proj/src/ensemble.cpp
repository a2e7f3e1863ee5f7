#include "codemix/ensemble.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <map>
#include <thread>

#include "codemix/text.hpp"

namespace codemix {

void EnsembleConfig::validate() const {
  if (num_bags < 1) throw UsageError("num_bags must be >= 1");
  if (jobs < 1) throw UsageError("jobs must be >= 1");
  base.validate();
}

std::uint64_t member_seed(std::uint64_t master_seed, std::size_t index) {
  return derive_seed(master_seed, static_cast<std::uint64_t>(index));
}

std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DataError("bootstrap_sample: empty input");
  Rng rng(seed);
  std::vector<std::size_t> out(n);
  for (auto& i : out) i = rng.uniform_index(n);
  return out;
}

namespace {

template <typename E>
[[noreturn]] void rethrow_as(const E& e, std::size_t member) {
  throw E("member " + std::to_string(member) + ": " + e.what());
}

[[noreturn]] void rethrow_annotated(std::exception_ptr ep, std::size_t member) {
  try {
    std::rethrow_exception(ep);
  } catch (const NumericalError& e) {
    rethrow_as(e, member);
  } catch (const DataError& e) {
    rethrow_as(e, member);
  } catch (const UsageError& e) {
    rethrow_as(e, member);
  }
}

}  // namespace

EnsembleResult train_ensemble(std::span<const Example> train_set,
                              std::span<const Example> val_set,
                              const EnsembleConfig& config) {
  config.validate();
  if (train_set.empty()) throw DataError("training set is empty");

  const std::size_t b = config.num_bags;
  std::vector<Network> members(b);
  std::vector<MemberReport> reports(b);
  std::vector<std::exception_ptr> errors(b);
  const ExampleRefs val_refs = refs_of(val_set);

  const auto train_member = [&](std::size_t i) {
    try {
      const std::uint64_t seed = member_seed(config.master_seed, i);
      ExampleRefs sample;
      sample.reserve(train_set.size());
      for (std::size_t k : bootstrap_indices(train_set.size(), seed)) {
        sample.push_back(&train_set[k]);
      }
      NetworkConfig nc = config.base;
      nc.seed = seed;
      TrainResult r = train(sample, val_refs, nc);
      reports[i].val_accuracy = accuracy(r.network, val_refs);
      reports[i].report = std::move(r.report);
      members[i] = std::move(r.network);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  if (config.jobs == 1) {
    for (std::size_t i = 0; i < b; ++i) train_member(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(config.jobs, b); ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < b; i = next++) train_member(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  for (std::size_t i = 0; i < b; ++i) {
    if (errors[i]) rethrow_annotated(errors[i], i);
  }

  EnsembleResult result;
  result.ensemble.config = config;
  result.ensemble.members = std::move(members);
  result.members = std::move(reports);
  return result;
}

Vote tally_votes(std::span<const Probs> member_probs) {
  if (member_probs.empty()) throw DataError("cannot vote with no members");
  Vote vote;
  Probs summed{};
  for (const Probs& p : member_probs) {
    ++vote.counts[index_of(argmax_label(p))];
    for (std::size_t c = 0; c < kNumLabels; ++c) summed[c] += p[c];
  }
  const std::size_t top = *std::max_element(vote.counts.begin(), vote.counts.end());
  std::size_t best = kNumLabels;
  for (std::size_t c = 0; c < kNumLabels; ++c) {
    if (vote.counts[c] != top) continue;
    if (best == kNumLabels || summed[c] > summed[best]) best = c;
  }
  vote.label = label_from_index(best);
  return vote;
}

Vote predict_vote(const Ensemble& ensemble, std::span<const double> x) {
  std::vector<Probs> probs;
  probs.reserve(ensemble.members.size());
  for (const Network& m : ensemble.members) probs.push_back(predict(m, x).probs);
  return tally_votes(probs);
}

double ensemble_accuracy(const Ensemble& ensemble, std::span<const Example> examples) {
  if (examples.empty()) return 0.0;
  std::size_t hits = 0;
  for (const Example& ex : examples) {
    if (predict_vote(ensemble, ex.features).label == ex.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(examples.size());
}

namespace {

std::string member_file(std::size_t i) { return "member_" + std::to_string(i); }

}  // namespace

void save_ensemble(const Ensemble& ensemble, const std::filesystem::path& dir,
                   const std::string& vocab_file, std::string_view feature_mode) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "manifest", std::ios::binary);
    if (!out) throw UsageError("cannot write " + (dir / "manifest").string());
    out << "ensemble v1\n"
        << "num_bags=" << ensemble.members.size() << '\n'
        << "master_seed=" << ensemble.config.master_seed << '\n'
        << "vocabulary=" << vocab_file << '\n'
        << "feature_mode=" << feature_mode << '\n';
  }
  for (std::size_t i = 0; i < ensemble.members.size(); ++i) {
    std::ofstream out(dir / member_file(i), std::ios::binary);
    if (!out) throw UsageError("cannot write " + (dir / member_file(i)).string());
    write_model(ensemble.members[i], out);
  }
}

LoadedEnsemble load_ensemble(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest", std::ios::binary);
  if (!in) throw UsageError("no ensemble manifest in " + dir.string());
  std::string line;
  if (!std::getline(in, line) || line != "ensemble v1") {
    throw DataError("ensemble manifest: bad header");
  }
  std::map<std::string, std::string> kv;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("ensemble manifest: bad line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  unsigned long long bags = 0, seed = 0;
  if (!parse_u64(kv["num_bags"], bags) || bags == 0) {
    throw DataError("ensemble manifest: bad num_bags");
  }
  if (!parse_u64(kv["master_seed"], seed)) throw DataError("ensemble manifest: bad master_seed");
  if (kv["vocabulary"].empty()) throw DataError("ensemble manifest: missing vocabulary");

  LoadedEnsemble loaded;
  loaded.vocab_file = kv["vocabulary"];
  loaded.feature_mode = kv.count("feature_mode") ? kv["feature_mode"] : "binary";
  loaded.ensemble.config.num_bags = bags;
  loaded.ensemble.config.master_seed = seed;
  for (std::size_t i = 0; i < bags; ++i) {
    std::ifstream m(dir / member_file(i), std::ios::binary);
    if (!m) throw DataError("missing ensemble member file " + member_file(i));
    try {
      loaded.ensemble.members.push_back(read_model(m));
    } catch (const DataError& e) {
      throw DataError(member_file(i) + ": " + e.what());
    }
    const auto& first = loaded.ensemble.members.front().config;
    if (loaded.ensemble.members.back().config.input_dim != first.input_dim) {
      throw DataError("ensemble members disagree on input_dim");
    }
  }
  loaded.ensemble.config.base = loaded.ensemble.members.front().config;
  return loaded;
}

}  // namespace codemix
