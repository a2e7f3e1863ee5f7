#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "codemix/corpus.hpp"

namespace codemix {

/// Contiguous token sequence of order 1..N.
using Ngram = std::vector<std::string>;

/// Orders by length first, then lexicographically token by token.
struct NgramLess {
  bool operator()(const Ngram& a, const Ngram& b) const;
};

using NgramCounts = std::map<Ngram, std::size_t, NgramLess>;

struct VocabConfig {
  std::size_t min_count = 1;  // K
  std::size_t max_order = 1;  // N
  std::set<std::string> stopwords;
  bool case_fold = true;

  void validate() const;
};

/// Every contiguous ngram of order 1..min(N, tokens.size()) with its
/// multiplicity.
NgramCounts extract_ngrams(const std::vector<std::string>& tokens,
                           std::size_t max_order, bool case_fold);

class Vocabulary {
 public:
  Vocabulary() = default;

  /// Entries must already be in canonical order and unique.
  Vocabulary(std::vector<Ngram> entries, std::size_t min_count,
             std::size_t max_order, bool case_fold);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  std::size_t min_count() const { return min_count_; }
  std::size_t max_order() const { return max_order_; }
  bool case_fold() const { return case_fold_; }

  const Ngram& at(std::size_t index) const { return entries_.at(index); }
  const std::vector<Ngram>& entries() const { return entries_; }

  /// Index of `ngram`, or size() when absent.
  std::size_t find(const Ngram& ngram) const;
  bool contains(const Ngram& ngram) const { return find(ngram) != size(); }

  void write(std::ostream& out) const;
  static Vocabulary read(std::istream& in);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.entries_ == b.entries_ && a.min_count_ == b.min_count_ &&
           a.max_order_ == b.max_order_ && a.case_fold_ == b.case_fold_;
  }

 private:
  std::vector<Ngram> entries_;
  std::map<Ngram, std::size_t, NgramLess> index_;
  std::size_t min_count_ = 1;
  std::size_t max_order_ = 1;
  bool case_fold_ = true;
};

/// Counts corpus-wide occurrences, keeps ngrams seen at least K times,
/// then drops stop-word unigrams. Throws DataError if nothing survives.
Vocabulary build_vocabulary(const Corpus& corpus, const VocabConfig& config);

enum class FeatureMode { Binary, Count };

std::string_view to_string(FeatureMode mode);
FeatureMode parse_feature_mode(std::string_view text);

using FeatureVector = std::vector<double>;

FeatureVector vectorize(const std::vector<std::string>& tokens,
                        const Vocabulary& vocab, FeatureMode mode);
FeatureVector vectorize(const ProcessedTweet& tweet, const Vocabulary& vocab,
                        FeatureMode mode);

/// Distinct ngrams of exactly `order` tokens seen at least K times,
/// before any stop-word filtering.
std::size_t count_frequent_ngrams(const Corpus& corpus, std::size_t min_count,
                                  std::size_t order, bool case_fold = true);

/// Bundled English stop-word list, already lowercase.
const std::set<std::string>& default_stopwords();

/// One token per line; blank lines ignored. Entries are case folded.
std::set<std::string> read_stopwords(std::istream& in);

}  // namespace codemix
