#pragma once

#include <istream>
#include <map>
#include <string>
#include <vector>

namespace tscreen {

inline constexpr double kEarthRadiusKm = 6371.0088;

struct LatLon {
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees
};

/// Great-circle distance on a sphere of radius kEarthRadiusKm (haversine form).
double geodesic_distance(LatLon a, LatLon b);

class CentroidTable {
 public:
  CentroidTable() = default;
  /// Throws ConfigError on out-of-range coordinates.
  explicit CentroidTable(std::map<std::string, LatLon> entries);

  const std::map<std::string, LatLon>& entries() const { return entries_; }
  /// Throws ConfigError when the label has no centroid.
  LatLon at(const std::string& label) const;
  bool contains(const std::string& label) const { return entries_.count(label) > 0; }

  /// CSV `location,lat,lon` with header.
  static CentroidTable parse(std::istream& in);
  static CentroidTable load(const std::string& path);

 private:
  std::map<std::string, LatLon> entries_;
};

/// Department centroids of El Salvador keyed by the default schema's state labels.
CentroidTable default_centroids();

enum class AdmissibilityRule {
  kSeed,      // every member within d_max of one member
  kPairwise,  // every pair of members within d_max
};

struct RegionSet {
  std::vector<std::string> members;  // sorted
  std::string seed;

  friend bool operator==(const RegionSet&, const RegionSet&) = default;
};

/// All admissible member sets of size 1..k_max, deduplicated and sorted
/// lexicographically by their sorted member lists. `locations` restricts the
/// enumeration (every listed label must have a centroid); empty means all
/// entries of the table.
std::vector<RegionSet> enumerate_region_sets(const CentroidTable& centroids, int k_max, double d_max_km,
                                             AdmissibilityRule rule = AdmissibilityRule::kSeed,
                                             const std::vector<std::string>& locations = {});

}  // namespace tscreen
