#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "tscreen/errors.hpp"
#include "tscreen/synthetic.hpp"

namespace tscreen {
namespace {

using testing::day;

SyntheticConfig one_stratum(double rate, std::uint64_t seed) {
  SyntheticConfig c;
  c.schema = testing::small_schema();
  c.start = day("2010-01-01");
  c.end = day("2010-02-25");  // 56 days
  c.strata = {{{{"state", "LA PAZ"}, {"perpetrator", "father"}}, rate}};
  c.seed = seed;
  return c;
}

TEST(Synthetic, DeterministicInSeed) {
  auto c = testing::null_config(day("2010-01-01"), day("2010-03-01"), 20.0, 99);
  auto a = generate_synthetic(c);
  auto b = generate_synthetic(c);
  EXPECT_EQ(a, b);
  c.seed = 100;
  EXPECT_NE(generate_synthetic(c), a);
}

TEST(Synthetic, DatesSortedAndInsideCalendar) {
  auto c = testing::null_config(day("2010-01-01"), day("2010-12-31"), 5.0, 1);
  auto events = generate_synthetic(c);
  ASSERT_FALSE(events.empty());
  EXPECT_TRUE(std::is_sorted(events.begin(), events.end(), [](auto& x, auto& y) { return x.date < y.date; }));
  EXPECT_GE(events.front().date, c.start);
  EXPECT_LE(events.back().date, c.end);
}

TEST(Synthetic, PoissonTotalNearRate) {
  auto c = testing::null_config(day("2008-01-01"), day("2012-12-31"), 6.0, 8);
  const double days = days_between(c.start, c.end) + 1;
  const double n = static_cast<double>(generate_synthetic(c).size());
  EXPECT_NEAR(n, 6.0 * days, 4.0 * std::sqrt(6.0 * days));
}

TEST(Synthetic, InjectionTriplesTheRate) {
  double before = 0, during = 0;
  const int seeds = 1000;
  for (int s = 0; s < seeds; ++s) {
    auto c = one_stratum(1.0, static_cast<std::uint64_t>(s));
    Conjunction terms;
    terms.terms["state"] = {"LA PAZ"};
    c.injections.push_back({terms, day("2010-01-29"), day("2010-02-25"), 3.0});
    for (const auto& e : generate_synthetic(c)) (e.date < day("2010-01-29") ? before : during) += 1;
  }
  EXPECT_NEAR(during / before, 3.0, 0.05 * 3.0);
}

TEST(Synthetic, UnfixedDimensionsAreUniform) {
  auto c = one_stratum(40.0, 3);
  auto events = generate_synthetic(c);
  const auto& s = c.schema;
  for (const char* attr : {"age", "scene"}) {
    const auto d = *s.dimension_index(attr);
    const std::size_t k = s.label_count(d) - 1;
    std::vector<double> counts(k + 1, 0);
    for (const auto& e : events) counts[e.values[d]] += 1;
    EXPECT_EQ(counts[k], 0) << "UNKNOWN drawn for " << attr;
    const double expected = double(events.size()) / k;
    double chi = 0;
    for (std::size_t l = 0; l < k; ++l) chi += (counts[l] - expected) * (counts[l] - expected) / expected;
    // 99.9% quantiles of chi-square with 8 and 2 degrees of freedom.
    EXPECT_LT(chi, k == 9 ? 26.12 : 13.82) << attr;
  }
}

TEST(Synthetic, RawAgeFallsInItsBin) {
  auto events = generate_synthetic(one_stratum(30.0, 4));
  const auto s = testing::small_schema();
  const auto d = *s.age_dimension();
  for (const auto& e : events) {
    ASSERT_TRUE(e.raw_age);
    EXPECT_EQ(bin_age(*e.raw_age, s.dimension(d)), s.label(d, e.values[d]));
  }
}

TEST(Synthetic, UniformStrataCoverProduct) {
  const auto s = testing::small_schema();
  auto strata = uniform_strata(s, {"state", "scene"}, 84.0);
  EXPECT_EQ(strata.size(), 14u * 3u);
  for (const auto& st : strata) EXPECT_DOUBLE_EQ(st.rate, 2.0);
}

TEST(Synthetic, RejectsBadConfigs) {
  auto c = one_stratum(-1.0, 1);
  EXPECT_THROW(generate_synthetic(c), ConfigError);

  c = one_stratum(1.0, 1);
  Conjunction state;
  state.terms["state"] = {"LA PAZ"};
  c.injections.push_back({state, day("2009-12-01"), day("2010-01-10"), 3.0});
  EXPECT_THROW(generate_synthetic(c), ConfigError);

  c = one_stratum(1.0, 1);
  Conjunction scene;
  scene.terms["scene"] = {"lot"};
  c.injections.push_back({scene, day("2010-01-02"), day("2010-01-10"), 3.0});
  EXPECT_THROW(generate_synthetic(c), ConfigError);

  c = one_stratum(1.0, 1);
  c.injections.push_back({state, day("2010-01-02"), day("2010-01-10"), -2.0});
  EXPECT_THROW(generate_synthetic(c), ConfigError);
}

TEST(Synthetic, FromJson) {
  auto j = nlohmann::json::parse(R"({
    "start": "2010-01-01", "end": "2010-12-31", "seed": 12,
    "uniform": {"attributes": ["state", "perpetrator"], "total_rate": 5},
    "injections": [{"terms": {"state": ["LA UNION", "MORAZAN"], "perpetrator": "boyfriend"},
                    "start": "2010-06-01", "end": "2010-06-28", "multiplier": 3}]
  })");
  auto c = SyntheticConfig::from_json(j);
  EXPECT_EQ(c.seed, 12u);
  EXPECT_FALSE(c.schema.has_open_domains());
  EXPECT_EQ(c.strata.size(), 14u * 22u);
  ASSERT_EQ(c.injections.size(), 1u);
  EXPECT_EQ(c.injections[0].terms.terms.at("state").size(), 2u);
  EXPECT_FALSE(generate_synthetic(c).empty());
  EXPECT_THROW(SyntheticConfig::from_json(nlohmann::json::parse(R"({"start": "2010-01-01"})")), ConfigError);
}

}  // namespace
}  // namespace tscreen
