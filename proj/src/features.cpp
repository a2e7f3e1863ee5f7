#include "codemix/features.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "codemix/error.hpp"
#include "codemix/text.hpp"

namespace codemix {

bool NgramLess::operator()(const Ngram& a, const Ngram& b) const {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

void VocabConfig::validate() const {
  if (min_count < 1) throw UsageError("frequency threshold K must be >= 1");
  if (max_order < 1) throw UsageError("max ngram order N must be >= 1");
}

NgramCounts extract_ngrams(const std::vector<std::string>& tokens,
                           std::size_t max_order, bool case_fold) {
  NgramCounts counts;
  std::vector<std::string> folded;
  folded.reserve(tokens.size());
  for (const auto& t : tokens) folded.push_back(case_fold ? fold_case(t) : t);

  const std::size_t top = std::min(max_order, folded.size());
  for (std::size_t order = 1; order <= top; ++order) {
    for (std::size_t start = 0; start + order <= folded.size(); ++start) {
      Ngram g(folded.begin() + static_cast<std::ptrdiff_t>(start),
              folded.begin() + static_cast<std::ptrdiff_t>(start + order));
      ++counts[std::move(g)];
    }
  }
  return counts;
}

Vocabulary::Vocabulary(std::vector<Ngram> entries, std::size_t min_count,
                       std::size_t max_order, bool case_fold)
    : entries_(std::move(entries)),
      min_count_(min_count),
      max_order_(max_order),
      case_fold_(case_fold) {
  NgramLess less;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Ngram& g = entries_[i];
    if (g.empty() || g.size() > max_order_) {
      throw DataError("vocabulary entry " + std::to_string(i) +
                      " has order outside 1.." + std::to_string(max_order_));
    }
    if (i > 0 && !less(entries_[i - 1], g)) {
      throw DataError("vocabulary entries out of canonical order at index " +
                      std::to_string(i));
    }
    index_.emplace(g, i);
  }
}

std::size_t Vocabulary::find(const Ngram& ngram) const {
  const auto it = index_.find(ngram);
  return it == index_.end() ? entries_.size() : it->second;
}

void Vocabulary::write(std::ostream& out) const {
  out << "vocab v1 K=" << min_count_ << " N=" << max_order_
      << " case_fold=" << (case_fold_ ? 1 : 0) << '\n';
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    out << i << '\t' << join(entries_[i], " ") << '\n';
  }
  if (!out) throw DataError("failed writing vocabulary");
}

namespace {

std::size_t header_value(std::string_view field, std::string_view key) {
  unsigned long long v = 0;
  if (!field.starts_with(key) || !parse_u64(field.substr(key.size()), v)) {
    throw DataError("bad vocabulary header field '" + std::string(field) + "'");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

Vocabulary Vocabulary::read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("vocabulary: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto head = split_exact(line, ' ');
  if (head.size() != 5 || head[0] != "vocab" || head[1] != "v1") {
    throw DataError("vocabulary: bad header '" + line + "'");
  }
  const std::size_t k = header_value(head[2], "K=");
  const std::size_t n = header_value(head[3], "N=");
  const std::size_t fold = header_value(head[4], "case_fold=");
  if (fold > 1) throw DataError("vocabulary: case_fold must be 0 or 1");

  std::vector<Ngram> entries;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_exact(line, '\t');
    unsigned long long index = 0;
    if (fields.size() != 2 || !parse_u64(fields[0], index) ||
        index != entries.size() || fields[1].empty()) {
      throw DataError("vocabulary line " + std::to_string(line_no) +
                      ": malformed entry '" + line + "'");
    }
    Ngram g;
    for (auto tok : split_exact(fields[1], ' ')) g.emplace_back(tok);
    entries.push_back(std::move(g));
  }
  return Vocabulary(std::move(entries), k, n, fold == 1);
}

Vocabulary build_vocabulary(const Corpus& corpus, const VocabConfig& config) {
  config.validate();
  if (corpus.empty()) throw DataError("cannot build a vocabulary from an empty corpus");

  NgramCounts totals;
  for (const auto& tweet : corpus.tweets) {
    for (auto& [g, c] : extract_ngrams(tweet.tokens, config.max_order, config.case_fold)) {
      totals[g] += c;
    }
  }

  std::set<std::string> stop;
  for (const auto& w : config.stopwords) stop.insert(fold_case(w));

  std::vector<Ngram> kept;
  for (auto& [g, c] : totals) {
    if (c < config.min_count) continue;
    if (g.size() == 1 && stop.contains(fold_case(g[0]))) continue;
    kept.push_back(g);
  }
  if (kept.empty()) {
    throw DataError("empty vocabulary: no ngram occurs at least K=" +
                    std::to_string(config.min_count) + " times");
  }
  return Vocabulary(std::move(kept), config.min_count, config.max_order,
                    config.case_fold);
}

std::string_view to_string(FeatureMode mode) {
  return mode == FeatureMode::Binary ? "binary" : "count";
}

FeatureMode parse_feature_mode(std::string_view text) {
  const std::string lower = ascii_lower(text);
  if (lower == "binary") return FeatureMode::Binary;
  if (lower == "count") return FeatureMode::Count;
  throw UsageError("unknown feature mode '" + std::string(text) +
                   "' (expected binary or count)");
}

FeatureVector vectorize(const std::vector<std::string>& tokens,
                        const Vocabulary& vocab, FeatureMode mode) {
  FeatureVector v(vocab.size(), 0.0);
  for (const auto& [g, c] : extract_ngrams(tokens, vocab.max_order(), vocab.case_fold())) {
    const std::size_t j = vocab.find(g);
    if (j == vocab.size()) continue;
    v[j] = mode == FeatureMode::Binary ? 1.0 : static_cast<double>(c);
  }
  return v;
}

FeatureVector vectorize(const ProcessedTweet& tweet, const Vocabulary& vocab,
                        FeatureMode mode) {
  return vectorize(tweet.tokens, vocab, mode);
}

std::size_t count_frequent_ngrams(const Corpus& corpus, std::size_t min_count,
                                  std::size_t order, bool case_fold) {
  NgramCounts totals;
  for (const auto& tweet : corpus.tweets) {
    for (auto& [g, c] : extract_ngrams(tweet.tokens, order, case_fold)) {
      if (g.size() == order) totals[g] += c;
    }
  }
  std::size_t n = 0;
  for (const auto& [g, c] : totals) {
    if (c >= min_count) ++n;
  }
  return n;
}

std::set<std::string> read_stopwords(std::istream& in) {
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    words.insert(fold_case(fields[0]));
  }
  return words;
}

}  // namespace codemix
