#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "support.hpp"
#include "tscreen/errors.hpp"
#include "tscreen/ingest.hpp"

namespace tscreen {
namespace {

using testing::day;

const char* kSample =
    "date,age,gender,state,municipality,scene,perpetrator\n"
    "2008-01-02,13,female,La Union,Conchagua,victim's house,novio\n"
    "2008-01-03,,F,SAN MIGUEL,San Miguel,via publica,stranger\n"
    "2008-01-04,25,male,Morazán,,other,\n"
    "2008-01-05,40,hombre,Atlantis,Apopa,school,boss\n";

TEST(Ingest, ParsesAndResolvesLabels) {
  std::istringstream in(kSample);
  auto r = parse_events(in, default_schema());
  ASSERT_TRUE(r.errors.empty());
  ASSERT_EQ(r.records.size(), 4u);
  const auto& s = r.schema;
  auto label = [&](std::size_t row, const char* attr) {
    auto d = *s.dimension_index(attr);
    return s.label(d, r.records[row].values[d]);
  };
  EXPECT_EQ(label(0, "age"), "12-14");
  EXPECT_EQ(r.records[0].raw_age, 13);
  EXPECT_EQ(label(0, "perpetrator"), "boyfriend");
  EXPECT_EQ(label(0, "state"), "LA UNION");
  EXPECT_EQ(label(1, "age"), "UNKNOWN");
  EXPECT_FALSE(r.records[1].raw_age);
  EXPECT_EQ(label(1, "gender"), "female");
  EXPECT_EQ(label(1, "scene"), "public road");
  EXPECT_EQ(label(2, "state"), "MORAZAN");
  EXPECT_EQ(label(2, "municipality"), "UNKNOWN");
  EXPECT_EQ(label(2, "perpetrator"), "UNKNOWN");
  EXPECT_EQ(label(3, "state"), "UNKNOWN");
  EXPECT_EQ(label(3, "municipality"), "APOPA");
  EXPECT_FALSE(s.has_open_domains());
  const auto m = *s.dimension_index("municipality");
  EXPECT_EQ(s.dimension(m).labels, (std::vector<std::string>{"APOPA", "CONCHAGUA", "SAN MIGUEL", "UNKNOWN"}));
}

TEST(Ingest, RowErrorsAreReportedNotFatal) {
  std::istringstream in(
      "date,age,gender,state,municipality,scene,perpetrator\n"
      "2008-01-02,13,female,La Union,X,other,novio\n"
      "2008-02-30,13,female,La Union,X,other,novio\n"
      "2008-01-02,abc,female,La Union,X,other,novio\n"
      "2008-01-02,-3,female,La Union,X,other,novio\n"
      "2008-01-02,121,female,La Union,X,other,novio\n"
      "2008-01-02,13,female\n"
      "2008-01-09,120,female,La Union,Y,other,novio\n");
  auto r = parse_events(in, default_schema());
  EXPECT_EQ(r.records.size(), 2u);
  ASSERT_EQ(r.errors.size(), 5u);
  EXPECT_EQ(r.errors[0].line, 3u);
  EXPECT_EQ(r.errors[4].line, 7u);
  // Municipality of a rejected row must not leak into the domain.
  const auto m = *r.schema.dimension_index("municipality");
  EXPECT_EQ(r.schema.dimension(m).labels, (std::vector<std::string>{"X", "Y", "UNKNOWN"}));
  EXPECT_EQ(r.records[1].values[m], 1);
}

TEST(Ingest, DeclaredRangeRejectsOutsideDates) {
  auto attrs = testing::small_schema().attributes();
  Schema s(attrs, DateFormat::kIso, std::pair{day("2008-01-01"), day("2008-01-31")});
  std::istringstream in("date,age,state,scene,perpetrator\n2007-12-31,1,LA PAZ,lot,father\n2008-01-31,1,LA PAZ,lot,father\n");
  auto r = parse_events(in, s);
  EXPECT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.errors.size(), 1u);
}

TEST(Ingest, MissingColumnIsFatal) {
  std::istringstream in("date,age,gender,state,scene,perpetrator\n2008-01-02,13,female,La Union,other,novio\n");
  EXPECT_THROW(parse_events(in, default_schema()), SchemaMismatch);
}

TEST(Ingest, HeaderMatchingIgnoresCaseOrderAndBom) {
  std::istringstream in("\xEF\xBB\xBFPerpetrator,Scene,STATE,age,date\nfather,lot,La Paz,7,2008-03-01\n");
  auto r = parse_events(in, testing::small_schema());
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].raw_age, 7);
}

TEST(Ingest, SourceColumnsAndDateFormat) {
  auto attrs = testing::small_schema().attributes();
  attrs[0].column = "fecha";
  attrs[2].column = "departamento";
  Schema s(attrs, DateFormat::kMonthDay);
  std::istringstream in("fecha;age;departamento;scene;perpetrator\n01/30/2008;14;La Paz;lot;father\n");
  auto r = parse_events(in, s, ';');
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].date, day("2008-01-30"));
}

TEST(Ingest, EmptyInputHasNoEvents) {
  std::istringstream in("");
  auto r = parse_events(in, default_schema());
  EXPECT_TRUE(r.records.empty());
  EXPECT_TRUE(r.errors.empty());
  EXPECT_FALSE(r.schema.has_open_domains());
  EXPECT_EQ(summarize(r.records, r.schema).total, 0u);
}

TEST(Ingest, PartitionOfDataRows) {
  // Property: every data row becomes exactly one record or one error.
  std::mt19937_64 rng(5);
  const char* dates[] = {"2008-01-01", "2008-02-31", "x", "2010-12-31"};
  const char* ages[] = {"1", "", "200", "q", "56", "-1"};
  const char* states[] = {"La Paz", "", "Nowhere", "Usulután"};
  for (int trial = 0; trial < 50; ++trial) {
    std::ostringstream text;
    text << "date,age,state,scene,perpetrator\n";
    const int rows = 1 + trial;
    for (int i = 0; i < rows; ++i) {
      if (rng() % 10 == 0) {
        text << dates[rng() % 4] << ",3\n";
        continue;
      }
      text << dates[rng() % 4] << ',' << ages[rng() % 6] << ',' << states[rng() % 4] << ",lot,father\n";
    }
    std::istringstream in(text.str());
    auto r = parse_events(in, testing::small_schema());
    EXPECT_EQ(r.records.size() + r.errors.size(), static_cast<std::size_t>(rows));
  }
}

TEST(Ingest, WriteParseRoundTrip) {
  const auto s = testing::small_schema();
  auto records = testing::random_records(s, 2000, day("2005-01-01"), 900, 17);
  std::ostringstream out;
  write_events(out, records, canonical_schema(s));
  std::istringstream in(out.str());
  auto r = parse_events(in, canonical_schema(s));
  EXPECT_TRUE(r.errors.empty());
  EXPECT_EQ(r.records, records);
}

TEST(Ingest, RoundTripThroughNonCanonicalLayout) {
  std::istringstream in(kSample);
  auto first = parse_events(in, default_schema());
  std::ostringstream out;
  write_events(out, first.records, canonical_schema(first.schema));
  std::istringstream again(out.str());
  auto second = parse_events(again, canonical_schema(default_schema()));
  EXPECT_EQ(second.records, first.records);
  EXPECT_EQ(second.schema, canonical_schema(first.schema));
}

TEST(Ingest, BinAgeIsTotal) {
  const auto s = default_schema();
  const auto& age = s.dimension(*s.age_dimension());
  for (int v = 0; v <= age.max_value; ++v) {
    const auto& label = bin_age(v, age);
    EXPECT_NE(label, "UNKNOWN");
  }
  EXPECT_EQ(bin_age(12, age), "12-14");
  EXPECT_EQ(bin_age(14, age), "12-14");
  EXPECT_EQ(bin_age(15, age), "15-17");
  EXPECT_EQ(bin_age(99, age), "56+");
}

TEST(Summary, MatchesDirectComputation) {
  const auto s = testing::small_schema();
  auto records = testing::random_records(s, 3000, day("2005-01-01"), 365, 23);
  auto summary = summarize(records, s);
  EXPECT_EQ(summary.total, records.size());

  std::vector<double> ages;
  for (const auto& r : records) {
    if (r.raw_age) ages.push_back(*r.raw_age);
  }
  const double mean = std::accumulate(ages.begin(), ages.end(), 0.0) / ages.size();
  double ss = 0;
  for (double a : ages) ss += (a - mean) * (a - mean);
  EXPECT_EQ(summary.known_age_count, ages.size());
  EXPECT_NEAR(*summary.age_mean, mean, 1e-9);
  EXPECT_NEAR(*summary.age_sd, std::sqrt(ss / (ages.size() - 1)), 1e-9);

  for (const auto& [attr, counts] : summary.per_category_counts) {
    std::size_t sum = 0;
    for (const auto& [label, n] : counts) sum += n;
    EXPECT_EQ(sum, records.size()) << attr;
  }
  std::size_t hist = 0;
  for (const auto& [age, n] : summary.age_histogram) hist += n;
  EXPECT_EQ(hist, ages.size());
  auto j = summary.to_json();
  EXPECT_EQ(j["total"], records.size());
}

}  // namespace
}  // namespace tscreen
