#include <doctest.h>

#include <sstream>

#include "codemix/error.hpp"
#include "codemix/metrics.hpp"
#include "codemix/random.hpp"

using namespace codemix;

namespace {

constexpr Label P = Label::Positive, N = Label::Negative, U = Label::Neutral;

}  // namespace

TEST_CASE("confusion") {
  const std::vector<Label> g = {P, N, U};
  const ConfusionMatrix cm = confusion(g, g);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(cm.counts[i][j] == (i == j ? 1u : 0u));
  }
  CHECK(report(cm).accuracy == 1.0);

  const std::vector<Label> pp = {P, P}, nn = {N, N};
  const ConfusionMatrix wrong = confusion(pp, nn);
  CHECK(wrong.counts[index_of(P)][index_of(N)] == 2);
  CHECK(report(wrong).accuracy == 0.0);

  CHECK_THROWS_AS(confusion(g, pp), DataError);
  CHECK_THROWS_AS(confusion(std::span<const Label>{}, std::span<const Label>{}), DataError);
  CHECK_THROWS_AS(report(ConfusionMatrix{}), DataError);
}

TEST_CASE("report on the four-example hand case") {
  const std::vector<Label> golds = {P, P, N, U}, preds = {P, N, N, U};
  const MetricsReport r = report(confusion(golds, preds));
  const auto& pos = r.per_class[index_of(P)];
  CHECK(pos.precision == 1.0);
  CHECK(pos.recall == 0.5);
  CHECK(pos.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(r.per_class[index_of(N)].f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(r.per_class[index_of(U)].f1 == 1.0);
  CHECK(r.macro_f1 == doctest::Approx(7.0 / 9.0).epsilon(1e-15));
  CHECK(r.accuracy == 0.75);
  CHECK(r.weighted_f1 == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(r.support == std::array<std::size_t, 3>{1, 1, 2});

  std::ostringstream kv;
  write_key_values(r, kv);
  CHECK(kv.str().rfind("accuracy=0.750000\nmacro_f1=0.777778\nweighted_f1=0.750000\n", 0) == 0);
  CHECK(kv.str().find("precision_positive=1.000000\n") != std::string::npos);
  std::ostringstream table;
  write_table(r, confusion(golds, preds), table);
  CHECK(table.str().find("positive") != std::string::npos);
}

TEST_CASE("absent class scores zero") {
  const std::vector<Label> g = {P, N}, p = {P, N};
  const MetricsReport r = report(confusion(g, p));
  const auto& neu = r.per_class[index_of(U)];
  CHECK(neu.precision == 0.0);
  CHECK(neu.recall == 0.0);
  CHECK(neu.f1 == 0.0);
  CHECK(r.macro_f1 == doctest::Approx(2.0 / 3.0));
  CHECK(r.weighted_f1 == 1.0);
}

TEST_CASE("property: permutation invariance and bounds") {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(40);
    std::vector<std::pair<Label, Label>> pairs;
    for (std::size_t i = 0; i < n; ++i) {
      pairs.emplace_back(label_from_index(rng.uniform_index(3)), label_from_index(rng.uniform_index(3)));
    }
    const auto score = [&] {
      std::vector<Label> g, p;
      for (auto& [a, b] : pairs) {
        g.push_back(a);
        p.push_back(b);
      }
      return report(confusion(g, p));
    };
    const MetricsReport a = score();
    rng.shuffle(std::span<std::pair<Label, Label>>(pairs));
    const MetricsReport b = score();
    REQUIRE(a.macro_f1 == b.macro_f1);
    REQUIRE(a.weighted_f1 == b.weighted_f1);
    REQUIRE(a.accuracy == b.accuracy);
    REQUIRE((a.macro_f1 >= 0.0 && a.macro_f1 <= 1.0));
    REQUIRE((a.weighted_f1 >= 0.0 && a.weighted_f1 <= 1.0));
  }
}

TEST_CASE("diagonal matrices score one everywhere") {
  ConfusionMatrix cm;
  cm.counts[0][0] = 4;
  cm.counts[1][1] = 1;
  cm.counts[2][2] = 9;
  const MetricsReport r = report(cm);
  CHECK(r.accuracy == 1.0);
  CHECK(r.macro_f1 == 1.0);
  CHECK(r.weighted_f1 == 1.0);
  for (const auto& s : r.per_class) CHECK((s.precision == 1.0 && s.recall == 1.0 && s.f1 == 1.0));
}
