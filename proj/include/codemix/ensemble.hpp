#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "codemix/error.hpp"
#include "codemix/network.hpp"
#include "codemix/random.hpp"

namespace codemix {

struct EnsembleConfig {
  std::size_t num_bags = 10;
  NetworkConfig base;
  std::uint64_t master_seed = 0;
  /// Members trained concurrently; 1 trains them in order.
  std::size_t jobs = 1;

  void validate() const;
};

struct Ensemble {
  EnsembleConfig config;
  std::vector<Network> members;
};

/// Seed for member `index`; depends only on (master_seed, index).
std::uint64_t member_seed(std::uint64_t master_seed, std::size_t index);

/// n draws with replacement from [0, n).
std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed);

template <typename T>
std::vector<T> bootstrap_sample(std::span<const T> data, std::uint64_t seed) {
  if (data.empty()) throw DataError("bootstrap_sample: empty input");
  std::vector<T> out;
  out.reserve(data.size());
  for (std::size_t i : bootstrap_indices(data.size(), seed)) out.push_back(data[i]);
  return out;
}

struct MemberReport {
  TrainReport report;
  double val_accuracy = 0.0;
};

struct EnsembleResult {
  Ensemble ensemble;
  std::vector<MemberReport> members;
};

/// Member i trains on a bootstrap resample drawn with member_seed(master, i)
/// and is initialized from the same seed. Training errors are rethrown
/// with the member index prepended.
EnsembleResult train_ensemble(std::span<const Example> train_set,
                              std::span<const Example> val_set,
                              const EnsembleConfig& config);

struct Vote {
  Label label = Label::Negative;
  std::array<std::size_t, kNumLabels> counts{};
};

/// Plurality over member argmax labels. Ties among the top labels go to
/// the largest summed probability among those labels, then to the lowest
/// canonical index.
Vote tally_votes(std::span<const Probs> member_probs);
Vote predict_vote(const Ensemble& ensemble, std::span<const double> x);

double ensemble_accuracy(const Ensemble& ensemble,
                         std::span<const Example> examples);

/// Directory layout: "manifest" plus member_<i> model files. The
/// vocabulary file is named in the manifest and written by the caller.
void save_ensemble(const Ensemble& ensemble, const std::filesystem::path& dir,
                   const std::string& vocab_file, std::string_view feature_mode);

struct LoadedEnsemble {
  Ensemble ensemble;
  std::string vocab_file;
  std::string feature_mode;
};
LoadedEnsemble load_ensemble(const std::filesystem::path& dir);

}  // namespace codemix
