#include <doctest.h>

#include <sstream>

#include "codemix/corpus.hpp"
#include "codemix/error.hpp"
#include "codemix/random.hpp"

using namespace codemix;

namespace {

const char* const kExample173 =
    "meta\t173\tpositive\n"
    "@\tO\n"
    "BeingSalmanKhan\tEng\n"
    "It\tEng\n"
    "means\tEng\n"
    "sidhi\tHin\n"
    "sadhi\tHin\n"
    "ladki\tHin\n"
    "best\tEng\n"
    "couple\tEng\n";

std::vector<RawTweet> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_conll(in);
}

RawTweet raw(std::vector<std::string> surfaces) {
  RawTweet t;
  t.id = 1;
  for (auto& s : surfaces) t.tokens.push_back({std::move(s), LangTag::Other});
  return t;
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("labels and tags") {
  CHECK(parse_label("Positive") == Label::Positive);
  CHECK(parse_label("NEGATIVE") == Label::Negative);
  CHECK(parse_label("neutral") == Label::Neutral);
  CHECK_FALSE(parse_label("mixed"));
  CHECK(index_of(Label::Negative) == 0);
  CHECK(index_of(Label::Neutral) == 1);
  CHECK(index_of(Label::Positive) == 2);
  CHECK(parse_lang_tag("ENG") == LangTag::Eng);
  CHECK(parse_lang_tag("hin") == LangTag::Hin);
  CHECK(parse_lang_tag("o") == LangTag::Other);
  CHECK_FALSE(parse_lang_tag("Spa"));
}

TEST_CASE("parse_conll reads the example record") {
  const auto tweets = parse(kExample173);
  REQUIRE(tweets.size() == 1);
  CHECK(tweets[0].id == 173);
  CHECK(tweets[0].label == Label::Positive);
  REQUIRE(tweets[0].tokens.size() == 9);
  CHECK(tweets[0].tokens[0] == RawToken{"@", LangTag::Other});
  CHECK(tweets[0].tokens[4] == RawToken{"sidhi", LangTag::Hin});
  CHECK(tweets[0].tokens[8] == RawToken{"couple", LangTag::Eng});
}

TEST_CASE("parse_conll edge cases") {
  CHECK(parse("").empty());
  CHECK(parse("\n\n").empty());

  SUBCASE("space separators, CRLF and blank lines between records") {
    const auto t = parse("META 1 Negative\r\nbad   Eng\r\n\r\nmeta 2\nok O\n");
    REQUIRE(t.size() == 2);
    CHECK(t[0].label == Label::Negative);
    CHECK_FALSE(t[1].label.has_value());
    CHECK(t[1].tokens[0].surface == "ok");
  }

  SUBCASE("the word meta as a token") {
    const auto t = parse("meta 1 neutral\nmeta Eng\n");
    REQUIRE(t.size() == 1);
    CHECK(t[0].tokens[0].surface == "meta");
  }
}

TEST_CASE("parse_conll errors carry line numbers") {
  CHECK(error_of("meta 5 negative\nmeta 6 neutral\nok Eng\n").find("tweet 5 has no tokens") !=
        std::string::npos);
  CHECK(error_of("hello Eng\n").find("line 1") != std::string::npos);
  CHECK(error_of("meta x positive\n").find("non-integer") != std::string::npos);
  CHECK(error_of("meta 1 happy\nx O\n").find("unknown label") != std::string::npos);
  CHECK(error_of("meta 1 positive\nx Spa\n").find("line 2") != std::string::npos);
  CHECK(error_of("meta 1 positive\nlonely\n").find("line 2") != std::string::npos);
  CHECK(error_of("meta 1 positive\na O\nmeta 1 neutral\nb O\n").find("duplicate") !=
        std::string::npos);
  CHECK(error_of("meta 1 positive\n").find("no tokens") != std::string::npos);
}

TEST_CASE("is_url") {
  CHECK(is_url("https://t.co/abc"));
  CHECK(is_url("http://x"));
  CHECK(is_url("WWW.Example.com"));
  CHECK(is_url("ftp://host"));
  CHECK_FALSE(is_url("ladki"));
  CHECK_FALSE(is_url("www"));
}

TEST_CASE("preprocess") {
  const auto p = preprocess(parse(kExample173)[0]);
  CHECK(p.id == 173);
  CHECK(p.label == Label::Positive);
  CHECK(p.tokens == std::vector<std::string>{"It", "means", "sidhi", "sadhi", "ladki", "best",
                                              "couple"});

  CHECK(preprocess(raw({"hello"})).tokens == std::vector<std::string>{"hello"});
  CHECK(preprocess(raw({"@", "user1", "@", "user2", "hi", "https://t.co/x"})).tokens ==
        std::vector<std::string>{"hi"});
  CHECK(preprocess(raw({"#hashtag", "@"})).tokens == std::vector<std::string>{"#hashtag"});
  CHECK(preprocess(raw({"@user", "Ok"})).tokens == std::vector<std::string>{"@user", "Ok"});
}

TEST_CASE("simple format") {
  Corpus c = preprocess_all(parse(kExample173));
  std::ostringstream out;
  write_simple_format(c, out);
  CHECK(out.str() == "173\tIt means sidhi sadhi ladki best couple\tpositive\n");

  std::istringstream in(out.str());
  CHECK(read_simple_format(in) == c);

  std::ostringstream empty;
  write_simple_format(Corpus{}, empty);
  CHECK(empty.str().empty());
  std::istringstream empty_in("");
  CHECK(read_simple_format(empty_in).empty());

  Corpus unlabeled;
  unlabeled.tweets.push_back({9, std::nullopt, {"a", "b"}});
  std::ostringstream u;
  write_simple_format(unlabeled, u);
  CHECK(u.str() == "9\ta b\t-\n");

  std::istringstream bad_id("x\ta b\tpositive\n");
  CHECK_THROWS_WITH_AS(read_simple_format(bad_id), doctest::Contains("non-integer"), DataError);
  std::istringstream bad_fields("1\ta b\n");
  CHECK_THROWS_AS(read_simple_format(bad_fields), DataError);
  std::istringstream bad_label("1\ta\tgreat\n");
  CHECK_THROWS_AS(read_simple_format(bad_label), DataError);
}

TEST_CASE("property: simple format round-trips generated corpora") {
  Rng rng(2024);
  const std::vector<std::string> alphabet = {"a", "B", "ladki", "#tag", "😀", "ठीक", ":)", "x_y"};
  for (int trial = 0; trial < 200; ++trial) {
    Corpus c;
    const std::size_t n = rng.uniform_index(6);
    for (std::size_t i = 0; i < n; ++i) {
      ProcessedTweet t;
      t.id = i * 7 + rng.uniform_index(7);
      const std::size_t label = rng.uniform_index(4);
      if (label < 3) t.label = label_from_index(label);
      const std::size_t len = rng.uniform_index(5);
      for (std::size_t k = 0; k < len; ++k) {
        t.tokens.push_back(alphabet[rng.uniform_index(alphabet.size())]);
      }
      c.tweets.push_back(std::move(t));
    }
    std::ostringstream out;
    write_simple_format(c, out);
    std::istringstream in(out.str());
    REQUIRE(read_simple_format(in) == c);
  }
}

TEST_CASE("property: preprocess output is clean and idempotent") {
  Rng rng(7);
  const std::vector<std::string> pool = {"@", "user", "http://a.b", "www.x.org", "hi",
                                         "Yaar", "s3://bucket", "#win", "ok"};
  for (int trial = 0; trial < 500; ++trial) {
    RawTweet t;
    t.id = static_cast<std::uint64_t>(trial);
    const std::size_t len = 1 + rng.uniform_index(8);
    for (std::size_t k = 0; k < len; ++k) {
      t.tokens.push_back({pool[rng.uniform_index(pool.size())], LangTag::Eng});
    }
    const ProcessedTweet p = preprocess(t);
    for (const auto& tok : p.tokens) {
      REQUIRE(tok != "@");
      REQUIRE_FALSE(is_url(tok));
    }
    if (p.tokens.empty()) continue;
    RawTweet again;
    again.id = p.id;
    for (const auto& tok : p.tokens) again.tokens.push_back({tok, LangTag::Other});
    REQUIRE(preprocess(again).tokens == p.tokens);
  }
}
