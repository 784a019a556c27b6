#include "tscreen/conjunction.hpp"

#include <algorithm>

#include "tscreen/errors.hpp"

namespace tscreen {

nlohmann::json Conjunction::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [attr, labels] : terms) j[attr] = std::vector<std::string>(labels.begin(), labels.end());
  return j;
}

Conjunction Conjunction::from_json(const nlohmann::json& j) {
  Conjunction q;
  if (j.is_null()) return q;
  if (!j.is_object()) throw QueryError("conjunction must be an object of attribute -> labels");
  for (const auto& [attr, v] : j.items()) {
    auto& set = q.terms[attr];
    if (v.is_string()) {
      set.insert(v.get<std::string>());
    } else if (v.is_array()) {
      for (const auto& l : v) {
        if (!l.is_string()) throw QueryError("labels of '" + attr + "' must be strings");
        set.insert(l.get<std::string>());
      }
    } else {
      throw QueryError("term '" + attr + "' must be a label or a list of labels");
    }
  }
  return q;
}

std::string Conjunction::to_string() const {
  std::string out;
  for (const auto& [attr, labels] : terms) {
    if (!out.empty()) out += ", ";
    out += attr + "=";
    if (labels.size() == 1) {
      out += *labels.begin();
    } else {
      out += "{";
      bool first = true;
      for (const auto& l : labels) {
        if (!first) out += ", ";
        out += l;
        first = false;
      }
      out += "}";
    }
  }
  return out;
}

const ResolvedTerm* ResolvedConjunction::find(std::size_t dim) const {
  for (const auto& t : terms) {
    if (t.dim == dim) return &t;
  }
  return nullptr;
}

bool ResolvedConjunction::matches(std::span<const LabelId> values) const {
  for (const auto& t : terms) {
    if (!std::binary_search(t.labels.begin(), t.labels.end(), values[t.dim])) return false;
  }
  return true;
}

std::string ResolvedConjunction::key() const {
  std::string k;
  for (const auto& t : terms) {
    k.push_back(static_cast<char>(t.dim));
    k.push_back(static_cast<char>(t.labels.size() & 0xFF));
    k.push_back(static_cast<char>(t.labels.size() >> 8));
    for (auto l : t.labels) {
      k.push_back(static_cast<char>(l & 0xFF));
      k.push_back(static_cast<char>(l >> 8));
    }
  }
  return k;
}

ResolvedConjunction resolve(const Conjunction& q, const Schema& schema) {
  ResolvedConjunction r;
  for (const auto& [attr, labels] : q.terms) {
    ResolvedTerm t;
    t.dim = schema.require_dimension(attr);
    if (labels.empty()) throw QueryError("term '" + attr + "' has no labels");
    for (const auto& l : labels) {
      auto id = schema.find_label(t.dim, l);
      if (!id) throw QueryError("unknown label '" + l + "' for attribute '" + attr + "'");
      t.labels.push_back(*id);
    }
    std::sort(t.labels.begin(), t.labels.end());
    t.labels.erase(std::unique(t.labels.begin(), t.labels.end()), t.labels.end());
    r.terms.push_back(std::move(t));
  }
  std::sort(r.terms.begin(), r.terms.end(), [](const auto& a, const auto& b) { return a.dim < b.dim; });
  return r;
}

Conjunction unresolve(const ResolvedConjunction& q, const Schema& schema) {
  Conjunction c;
  for (const auto& t : q.terms) {
    auto& set = c.terms[schema.dimension(t.dim).name];
    for (auto l : t.labels) set.insert(schema.label(t.dim, l));
  }
  return c;
}

}  // namespace tscreen
