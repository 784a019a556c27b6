#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tscreen/schema.hpp"

namespace tscreen {

/// Attribute -> admissible labels. A multi-label term aggregates (e.g. several states).
struct Conjunction {
  std::map<std::string, std::set<std::string>> terms;

  std::size_t size() const { return terms.size(); }
  bool empty() const { return terms.empty(); }

  nlohmann::json to_json() const;
  static Conjunction from_json(const nlohmann::json& j);
  std::string to_string() const;

  friend bool operator==(const Conjunction&, const Conjunction&) = default;
};

struct ResolvedTerm {
  std::size_t dim = 0;
  std::vector<LabelId> labels;  // sorted, unique, non-empty

  friend bool operator==(const ResolvedTerm&, const ResolvedTerm&) = default;
};

/// Conjunction bound to a schema: terms sorted by dimension.
struct ResolvedConjunction {
  std::vector<ResolvedTerm> terms;

  std::size_t size() const { return terms.size(); }
  const ResolvedTerm* find(std::size_t dim) const;
  bool matches(std::span<const LabelId> values) const;
  /// Canonical binary key for caching.
  std::string key() const;

  friend bool operator==(const ResolvedConjunction&, const ResolvedConjunction&) = default;
};

/// Throws QueryError on unknown attributes, unknown labels or empty terms.
ResolvedConjunction resolve(const Conjunction& q, const Schema& schema);
Conjunction unresolve(const ResolvedConjunction& q, const Schema& schema);

}  // namespace tscreen
