#include "codemix/corpus.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "codemix/error.hpp"
#include "codemix/text.hpp"

namespace codemix {

Label label_from_index(std::size_t index) {
  if (index >= kNumLabels) {
    throw DataError("label index out of range: " + std::to_string(index));
  }
  return static_cast<Label>(index);
}

std::string_view to_string(Label label) {
  switch (label) {
    case Label::Negative: return "negative";
    case Label::Neutral: return "neutral";
    case Label::Positive: return "positive";
  }
  return "?";
}

std::optional<Label> parse_label(std::string_view text) {
  const std::string lower = ascii_lower(text);
  if (lower == "negative") return Label::Negative;
  if (lower == "neutral") return Label::Neutral;
  if (lower == "positive") return Label::Positive;
  return std::nullopt;
}

std::string_view to_string(LangTag tag) {
  switch (tag) {
    case LangTag::Eng: return "Eng";
    case LangTag::Hin: return "Hin";
    case LangTag::Other: return "O";
  }
  return "?";
}

std::optional<LangTag> parse_lang_tag(std::string_view text) {
  const std::string lower = ascii_lower(text);
  if (lower == "eng") return LangTag::Eng;
  if (lower == "hin") return LangTag::Hin;
  if (lower == "o") return LangTag::Other;
  return std::nullopt;
}

namespace {

void strip_line_ending(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

void strip_bom(std::string& line, std::size_t line_no) {
  if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
}

[[noreturn]] void fail_at(std::size_t line_no, std::string_view what,
                          std::string_view content) {
  std::ostringstream msg;
  msg << "line " << line_no << ": " << what << ": '" << content << "'";
  throw DataError(msg.str());
}

bool is_meta_keyword(std::string_view field) {
  return ascii_lower(field) == "meta";
}

}  // namespace

std::vector<RawTweet> parse_conll(std::istream& input) {
  std::vector<RawTweet> tweets;
  std::set<std::uint64_t> seen_ids;
  std::size_t current_meta_line = 0;
  std::string line;
  std::size_t line_no = 0;

  const auto close_record = [&] {
    if (!tweets.empty() && tweets.back().tokens.empty()) {
      std::ostringstream msg;
      msg << "line " << current_meta_line << ": tweet " << tweets.back().id
          << " has no tokens";
      throw DataError(msg.str());
    }
  };

  while (std::getline(input, line)) {
    ++line_no;
    strip_line_ending(line);
    strip_bom(line, line_no);
    const auto fields = split_fields(line);
    if (fields.empty()) continue;

    // "meta Eng" is the word meta tagged as a token, not a record header.
    const bool token_named_meta =
        fields.size() == 2 && parse_lang_tag(fields[1]).has_value();
    if (is_meta_keyword(fields[0]) && !token_named_meta) {
      close_record();
      if (fields.size() < 2 || fields.size() > 3) {
        fail_at(line_no, "malformed meta line", line);
      }
      unsigned long long id = 0;
      if (!parse_u64(fields[1], id)) fail_at(line_no, "non-integer tweet id", line);
      RawTweet tweet;
      tweet.id = id;
      if (fields.size() == 3) {
        tweet.label = parse_label(fields[2]);
        if (!tweet.label) fail_at(line_no, "unknown label", line);
      }
      if (!seen_ids.insert(tweet.id).second) {
        fail_at(line_no, "duplicate tweet id", line);
      }
      current_meta_line = line_no;
      tweets.push_back(std::move(tweet));
      continue;
    }

    if (tweets.empty()) fail_at(line_no, "token line before any meta line", line);
    if (fields.size() < 2) fail_at(line_no, "token line needs surface and tag", line);
    const auto tag = parse_lang_tag(fields[1]);
    if (!tag) fail_at(line_no, "unknown language tag", line);
    tweets.back().tokens.push_back(RawToken{std::string(fields[0]), *tag});
  }
  close_record();
  return tweets;
}

bool is_url(std::string_view surface) {
  const std::string lower = ascii_lower(surface);
  return lower.starts_with("http://") || lower.starts_with("https://") ||
         lower.starts_with("www.") || lower.find("://") != std::string::npos;
}

ProcessedTweet preprocess(const RawTweet& tweet) {
  ProcessedTweet out;
  out.id = tweet.id;
  out.label = tweet.label;
  const auto& tokens = tweet.tokens;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& surface = tokens[i].surface;
    if (surface == "@") {
      ++i;  // the username token
      continue;
    }
    if (is_url(surface)) continue;
    out.tokens.push_back(surface);
  }
  return out;
}

Corpus preprocess_all(const std::vector<RawTweet>& tweets) {
  Corpus corpus;
  corpus.tweets.reserve(tweets.size());
  for (const auto& t : tweets) corpus.tweets.push_back(preprocess(t));
  return corpus;
}

void write_simple_format(const Corpus& corpus, std::ostream& output) {
  for (const auto& tweet : corpus.tweets) {
    output << tweet.id << '\t' << join(tweet.tokens, " ") << '\t'
           << (tweet.label ? to_string(*tweet.label) : std::string_view("-"))
           << '\n';
  }
  if (!output) throw DataError("failed writing simple-format output");
}

Corpus read_simple_format(std::istream& input) {
  Corpus corpus;
  std::set<std::uint64_t> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(input, line)) {
    ++line_no;
    strip_line_ending(line);
    strip_bom(line, line_no);
    if (line.empty()) continue;
    const auto fields = split_exact(line, '\t');
    if (fields.size() != 3) {
      fail_at(line_no, "expected 3 tab-separated fields", line);
    }
    ProcessedTweet tweet;
    unsigned long long id = 0;
    if (!parse_u64(fields[0], id)) fail_at(line_no, "non-integer tweet id", line);
    tweet.id = id;
    if (!seen_ids.insert(tweet.id).second) {
      fail_at(line_no, "duplicate tweet id", line);
    }
    if (!fields[1].empty()) {
      for (auto tok : split_exact(fields[1], ' ')) {
        if (tok.empty()) fail_at(line_no, "empty token", line);
        tweet.tokens.emplace_back(tok);
      }
    }
    if (fields[2] != "-") {
      tweet.label = parse_label(fields[2]);
      if (!tweet.label) fail_at(line_no, "unknown label", line);
    }
    corpus.tweets.push_back(std::move(tweet));
  }
  return corpus;
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();

  bool conll = false;
  std::istringstream probe(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(probe, line)) {
    ++line_no;
    strip_line_ending(line);
    strip_bom(line, line_no);
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    conll = is_meta_keyword(fields[0]);
    break;
  }

  std::istringstream stream(content);
  try {
    if (conll) return preprocess_all(parse_conll(stream));
    return read_simple_format(stream);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::array<std::size_t, kNumLabels> label_distribution(const Corpus& corpus) {
  std::array<std::size_t, kNumLabels> counts{};
  for (const auto& t : corpus.tweets) {
    if (t.label) ++counts[index_of(*t.label)];
  }
  return counts;
}

}  // namespace codemix
