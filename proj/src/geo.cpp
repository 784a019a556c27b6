#include "tscreen/geo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "tscreen/csv.hpp"
#include "tscreen/errors.hpp"

namespace tscreen {
namespace {

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

double geodesic_distance(LatLon a, LatLon b) {
  const double phi1 = radians(a.lat);
  const double phi2 = radians(b.lat);
  const double dphi = phi2 - phi1;
  const double dlambda = radians(b.lon - a.lon);
  const double h = std::sin(dphi / 2) * std::sin(dphi / 2) +
                   std::cos(phi1) * std::cos(phi2) * std::sin(dlambda / 2) * std::sin(dlambda / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

CentroidTable::CentroidTable(std::map<std::string, LatLon> entries) : entries_(std::move(entries)) {
  for (const auto& [label, c] : entries_) {
    if (!(c.lat >= -90.0 && c.lat <= 90.0) || !(c.lon >= -180.0 && c.lon <= 180.0)) {
      throw ConfigError("centroid of '" + label + "' has out-of-range coordinates");
    }
  }
}

LatLon CentroidTable::at(const std::string& label) const {
  auto it = entries_.find(label);
  if (it == entries_.end()) throw ConfigError("location '" + label + "' has no centroid");
  return it->second;
}

CentroidTable CentroidTable::parse(std::istream& in) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header || header->size() < 3) throw ConfigError("centroid file needs a header 'location,lat,lon'");
  std::map<std::string, LatLon> entries;
  while (auto row = reader.next()) {
    if (row->size() < 3) throw ConfigError("centroid file line " + std::to_string(reader.line()) + " is short");
    try {
      entries[(*row)[0]] = LatLon{std::stod((*row)[1]), std::stod((*row)[2])};
    } catch (const std::exception&) {
      throw ConfigError("centroid file line " + std::to_string(reader.line()) + " has invalid coordinates");
    }
  }
  return CentroidTable(std::move(entries));
}

CentroidTable CentroidTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open centroid file '" + path + "'");
  return parse(in);
}

CentroidTable default_centroids() {
  return CentroidTable({
      {"AHUACHAPAN", {13.8500, -89.8500}},
      {"SANTA ANA", {14.1000, -89.5500}},
      {"SONSONATE", {13.6800, -89.7200}},
      {"CHALATENANGO", {14.1500, -89.0300}},
      {"LA LIBERTAD", {13.6700, -89.3600}},
      {"SAN SALVADOR", {13.7700, -89.1800}},
      {"CUSCATLAN", {13.8700, -88.9500}},
      {"LA PAZ", {13.4800, -88.9500}},
      {"CABANAS", {13.8700, -88.7500}},
      {"SAN VICENTE", {13.6000, -88.7000}},
      {"USULUTAN", {13.4500, -88.4500}},
      {"SAN MIGUEL", {13.4700, -88.1800}},
      {"MORAZAN", {13.7700, -88.1200}},
      {"LA UNION", {13.4900, -87.8600}},
  });
}

std::vector<RegionSet> enumerate_region_sets(const CentroidTable& centroids, int k_max, double d_max_km,
                                             AdmissibilityRule rule, const std::vector<std::string>& locations) {
  if (k_max < 1) throw ConfigError("k_max must be at least 1");
  if (!(d_max_km >= 0.0)) throw ConfigError("d_max must be non-negative");

  std::vector<std::string> labels = locations;
  if (labels.empty()) {
    for (const auto& [label, _] : centroids.entries()) labels.push_back(label);
  }
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  const std::size_t n = labels.size();
  std::vector<LatLon> coords;
  for (const auto& l : labels) coords.push_back(centroids.at(l));

  std::vector<std::vector<bool>> near(n, std::vector<bool>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) near[i][j] = geodesic_distance(coords[i], coords[j]) <= d_max_km;
  }

  // Member index sets -> chosen seed (smallest admissible seed index).
  std::map<std::vector<std::size_t>, std::size_t> found;
  std::vector<std::size_t> current;

  // Extends `current` with candidates[from..] in increasing index order.
  auto extend = [&](auto&& self, const std::vector<std::size_t>& candidates, std::size_t from, std::size_t seed) -> void {
    if (!current.empty()) {
      auto sorted = current;
      std::sort(sorted.begin(), sorted.end());
      found.emplace(sorted, seed);
    }
    if (current.size() == static_cast<std::size_t>(k_max)) return;
    for (std::size_t c = from; c < candidates.size(); ++c) {
      auto cand = candidates[c];
      if (rule == AdmissibilityRule::kPairwise) {
        bool ok = std::all_of(current.begin(), current.end(), [&](auto m) { return near[m][cand]; });
        if (!ok) continue;
      }
      current.push_back(cand);
      self(self, candidates, c + 1, seed);
      current.pop_back();
    }
  };

  for (std::size_t seed = 0; seed < n; ++seed) {
    std::vector<std::size_t> neighbours;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != seed && near[seed][j]) neighbours.push_back(j);
    }
    current = {seed};
    extend(extend, neighbours, 0, seed);
  }

  std::vector<RegionSet> out;
  for (const auto& [members, seed] : found) {
    RegionSet r;
    for (auto m : members) r.members.push_back(labels[m]);
    r.seed = labels[seed];
    out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.members < b.members; });
  return out;
}

}  // namespace tscreen
