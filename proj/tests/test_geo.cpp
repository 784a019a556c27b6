#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "tscreen/errors.hpp"
#include "tscreen/geo.hpp"

namespace tscreen {
namespace {

// Points on the equator separated by the given arc lengths.
LatLon equator_km(double km) { return {0.0, km / kEarthRadiusKm * 180.0 / M_PI}; }

std::vector<std::vector<std::string>> members_of(const std::vector<RegionSet>& sets) {
  std::vector<std::vector<std::string>> out;
  for (const auto& s : sets) out.push_back(s.members);
  return out;
}

TEST(Geo, OneDegreeOfLongitudeAtEquator) {
  EXPECT_NEAR(geodesic_distance({0, 0}, {0, 1}), 111.195, 0.01);
  EXPECT_NEAR(geodesic_distance({0, 0}, {1, 0}), 111.195, 0.01);
  EXPECT_DOUBLE_EQ(geodesic_distance({13.5, -88.0}, {13.5, -88.0}), 0.0);
}

TEST(Geo, SymmetricAndTriangle) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> lat(-80, 80), lon(-180, 180);
  for (int i = 0; i < 500; ++i) {
    LatLon a{lat(rng), lon(rng)}, b{lat(rng), lon(rng)}, c{lat(rng), lon(rng)};
    EXPECT_NEAR(geodesic_distance(a, b), geodesic_distance(b, a), 1e-9);
    EXPECT_LE(geodesic_distance(a, c), geodesic_distance(a, b) + geodesic_distance(b, c) + 1e-6);
  }
}

TEST(Geo, CollinearFixtureSeedRule) {
  CentroidTable t({{"A", equator_km(0)}, {"B", equator_km(40)}, {"C", equator_km(80)}});
  auto sets = enumerate_region_sets(t, 3, 50.0);
  EXPECT_EQ(members_of(sets), (std::vector<std::vector<std::string>>{
                                  {"A"}, {"A", "B"}, {"A", "B", "C"}, {"B"}, {"B", "C"}, {"C"}}));
  for (const auto& s : sets) {
    if (s.members.size() == 3) EXPECT_EQ(s.seed, "B");
  }
}

TEST(Geo, CollinearFixturePairwiseRule) {
  CentroidTable t({{"A", equator_km(0)}, {"B", equator_km(40)}, {"C", equator_km(80)}});
  auto sets = enumerate_region_sets(t, 3, 50.0, AdmissibilityRule::kPairwise);
  EXPECT_EQ(members_of(sets),
            (std::vector<std::vector<std::string>>{{"A"}, {"A", "B"}, {"B"}, {"B", "C"}, {"C"}}));
}

TEST(Geo, KMaxOneGivesSingletons) {
  auto sets = enumerate_region_sets(default_centroids(), 1, 1000.0);
  ASSERT_EQ(sets.size(), 14u);
  for (const auto& s : sets) EXPECT_EQ(s.seed, s.members[0]);
}

TEST(Geo, ZeroRadiusGivesSingletons) {
  EXPECT_EQ(enumerate_region_sets(default_centroids(), 5, 0.0).size(), 14u);
}

TEST(Geo, BruteForceAgreementOnRandomTables) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> lat(13.0, 14.5), lon(-90.0, -87.5);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8);
    std::map<std::string, LatLon> entries;
    for (int i = 0; i < n; ++i) entries[std::string(1, static_cast<char>('A' + i))] = {lat(rng), lon(rng)};
    const int k = 1 + static_cast<int>(rng() % 5);
    const double d = std::uniform_real_distribution<double>(0, 150)(rng);
    for (bool pairwise : {false, true}) {
      auto sets = enumerate_region_sets(CentroidTable(entries), k, d,
                                        pairwise ? AdmissibilityRule::kPairwise : AdmissibilityRule::kSeed);
      auto expected = oracle::brute_force_regions(entries, k, d, pairwise);
      auto got = members_of(sets);
      EXPECT_TRUE(std::is_sorted(got.begin(), got.end()));
      EXPECT_EQ(std::set(got.begin(), got.end()), expected) << "trial " << trial;
      EXPECT_EQ(got.size(), expected.size());
      for (const auto& s : sets) {
        EXPECT_TRUE(std::binary_search(s.members.begin(), s.members.end(), s.seed));
        for (const auto& m : s.members) {
          EXPECT_LE(geodesic_distance(entries.at(s.seed), entries.at(m)), d + 1e-9);
        }
      }
    }
  }
}

TEST(Geo, RestrictedLocations) {
  auto sets = enumerate_region_sets(default_centroids(), 3, 50.0, AdmissibilityRule::kSeed,
                                    {"LA UNION", "MORAZAN", "SAN MIGUEL"});
  for (const auto& s : sets) {
    for (const auto& m : s.members) EXPECT_TRUE(m == "LA UNION" || m == "MORAZAN" || m == "SAN MIGUEL");
  }
  EXPECT_THROW(enumerate_region_sets(default_centroids(), 3, 50.0, AdmissibilityRule::kSeed, {"ATLANTIS"}),
               ConfigError);
}

TEST(Geo, EasternDepartmentsFormAnAdmissibleSet) {
  auto sets = enumerate_region_sets(default_centroids(), 5, 50.0);
  const std::vector<std::string> east{"LA UNION", "MORAZAN", "SAN MIGUEL"};
  EXPECT_NE(std::find_if(sets.begin(), sets.end(), [&](const RegionSet& s) { return s.members == east; }),
            sets.end());
}

TEST(Geo, InvalidArguments) {
  EXPECT_THROW(enumerate_region_sets(default_centroids(), 0, 50.0), ConfigError);
  EXPECT_THROW(enumerate_region_sets(default_centroids(), 2, -1.0), ConfigError);
  EXPECT_THROW(CentroidTable({{"X", {91.0, 0.0}}}), ConfigError);
  EXPECT_THROW(CentroidTable({{"X", {0.0, 181.0}}}), ConfigError);
  EXPECT_THROW(default_centroids().at("ATLANTIS"), ConfigError);
}

TEST(Geo, ParseCentroidCsv) {
  std::istringstream in("location,lat,lon\nLa Union,13.49,-87.86\nMORAZAN,13.77,-88.12\n");
  auto t = CentroidTable::parse(in);
  EXPECT_EQ(t.entries().size(), 2u);
  EXPECT_TRUE(t.contains("La Union"));
  EXPECT_DOUBLE_EQ(t.at("La Union").lat, 13.49);
  std::istringstream bad("location,lat,lon\nX,abc,1\n");
  EXPECT_THROW(CentroidTable::parse(bad), ConfigError);
}

TEST(Geo, DataFileMatchesBuiltInTable) {
  auto file = CentroidTable::load(TSCREEN_DATA_DIR "/centroids_sv.csv");
  const auto defaults = default_centroids();
  const auto& builtin = defaults.entries();
  ASSERT_EQ(file.entries().size(), builtin.size());
  for (const auto& [label, p] : builtin) {
    EXPECT_DOUBLE_EQ(file.at(label).lat, p.lat);
    EXPECT_DOUBLE_EQ(file.at(label).lon, p.lon);
  }
}

}  // namespace
}  // namespace tscreen
