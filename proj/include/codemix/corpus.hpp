#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace codemix {

/// Sentiment class. The underlying value is the canonical index used by
/// the network output head and the confusion matrix.
enum class Label : std::uint8_t { Negative = 0, Neutral = 1, Positive = 2 };

inline constexpr std::size_t kNumLabels = 3;
inline constexpr std::array<Label, kNumLabels> kAllLabels = {
    Label::Negative, Label::Neutral, Label::Positive};

constexpr std::size_t index_of(Label label) {
  return static_cast<std::size_t>(label);
}
Label label_from_index(std::size_t index);

/// Lowercase name: "negative", "neutral", "positive".
std::string_view to_string(Label label);
/// Case-insensitive. Returns nullopt for anything else.
std::optional<Label> parse_label(std::string_view text);

enum class LangTag : std::uint8_t { Eng, Hin, Other };

std::string_view to_string(LangTag tag);
/// Accepts Eng, Hin and O in any casing.
std::optional<LangTag> parse_lang_tag(std::string_view text);

struct RawToken {
  std::string surface;
  LangTag tag = LangTag::Other;

  friend bool operator==(const RawToken&, const RawToken&) = default;
};

struct RawTweet {
  std::uint64_t id = 0;
  std::optional<Label> label;
  std::vector<RawToken> tokens;

  friend bool operator==(const RawTweet&, const RawTweet&) = default;
};

struct ProcessedTweet {
  std::uint64_t id = 0;
  std::optional<Label> label;
  std::vector<std::string> tokens;

  friend bool operator==(const ProcessedTweet&, const ProcessedTweet&) = default;
};

struct Corpus {
  std::vector<ProcessedTweet> tweets;

  bool empty() const { return tweets.empty(); }
  std::size_t size() const { return tweets.size(); }

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

/// Reads meta-delimited CoNLL records. Throws DataError with the 1-based
/// line number and offending content on malformed input, on a record
/// without tokens, and on a repeated id.
std::vector<RawTweet> parse_conll(std::istream& input);

/// Lowercased starts with http://, https:// or www., or contains "://".
bool is_url(std::string_view surface);

/// Drops each standalone "@" together with the token right after it, and
/// every URL token. Everything else is kept verbatim, in order.
ProcessedTweet preprocess(const RawTweet& tweet);

Corpus preprocess_all(const std::vector<RawTweet>& tweets);

/// One line per tweet: id TAB space-joined tokens TAB label (or "-").
void write_simple_format(const Corpus& corpus, std::ostream& output);
Corpus read_simple_format(std::istream& input);

/// Loads either format. A file whose first non-blank line begins with the
/// "meta" keyword is parsed as CoNLL and preprocessed; otherwise it is
/// read as the simple format.
Corpus load_corpus(const std::string& path);

/// Count of tweets per canonical label index; unlabeled tweets are skipped.
std::array<std::size_t, kNumLabels> label_distribution(const Corpus& corpus);

}  // namespace codemix
