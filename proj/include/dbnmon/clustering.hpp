#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "dbnmon/errors.hpp"
#include "dbnmon/model.hpp"

namespace dbnmon {

struct Cluster {
  std::string name;
  std::vector<VarId> vars;

  bool operator==(const Cluster&) const = default;
};

/// A cover of the state variables by named clusters. Clusters may overlap
/// except in BK mode, which requires a partition.
struct Clustering {
  std::vector<Cluster> clusters;

  bool operator==(const Clustering&) const = default;
  std::size_t size() const { return clusters.size(); }
};

/// Grammar: clusters separated by ';', variables by ','. Example:
/// "a0,a1,a2;a2,b0,b1". Whitespace around names is ignored.
inline Clustering parse_clustering(const std::string& text, const DbnModel& model) {
  Clustering out;
  std::string token;
  Cluster current;
  auto flush_var = [&]() {
    std::size_t b = token.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
      token.clear();
      return;
    }
    std::size_t e = token.find_last_not_of(" \t\r\n");
    std::string name = token.substr(b, e - b + 1);
    token.clear();
    auto v = model.find(name);
    if (!v) throw ValidationError("clustering references unknown variable '" + name + "'");
    current.vars.push_back(*v);
  };
  auto flush_cluster = [&]() {
    flush_var();
    if (current.vars.empty()) throw ValidationError("clustering contains an empty cluster");
    current.name = "c" + std::to_string(out.clusters.size());
    out.clusters.push_back(std::move(current));
    current = {};
  };
  for (char c : text) {
    if (c == ',')
      flush_var();
    else if (c == ';')
      flush_cluster();
    else
      token += c;
  }
  flush_cluster();
  return out;
}

inline std::string format_clustering(const Clustering& clustering, const DbnModel& model) {
  std::string out;
  for (std::size_t i = 0; i < clustering.clusters.size(); ++i) {
    if (i) out += ';';
    const Cluster& c = clustering.clusters[i];
    for (std::size_t j = 0; j < c.vars.size(); ++j) {
      if (j) out += ',';
      out += model.name(c.vars[j]);
    }
  }
  return out;
}

inline std::vector<Violation> validate_clustering(const Clustering& clustering,
                                                  const DbnModel& model,
                                                  bool require_disjoint) {
  std::vector<Violation> out;
  std::set<VarId> covered;
  std::set<VarId> seen;
  for (const Cluster& c : clustering.clusters) {
    if (c.vars.empty()) out.push_back({"cluster " + c.name, "empty cluster"});
    for (VarId v : c.vars) {
      if (v >= model.var_count()) {
        out.push_back({"cluster " + c.name, "variable id out of range"});
        continue;
      }
      if (model.variables[v].kind != VarKind::state)
        out.push_back({"cluster " + c.name,
                       "variable '" + model.name(v) + "' is not a state variable"});
      if (require_disjoint && seen.count(v))
        out.push_back({"cluster " + c.name,
                       "variable '" + model.name(v) + "' appears in two clusters"});
      seen.insert(v);
      covered.insert(v);
    }
  }
  for (VarId v : model.state_vars())
    if (!covered.count(v))
      out.push_back({"clustering", "state variable '" + model.name(v) + "' not covered"});
  return out;
}

/// Contiguous partition of the state variables into k blocks (sizes differ by
/// at most one). Useful for cluster-count sweeps on generated models.
inline Clustering block_clustering(const DbnModel& model, std::size_t k) {
  std::vector<VarId> states = model.state_vars();
  if (k < 1 || k > states.size())
    throw std::invalid_argument("block_clustering: k must be in [1, #state vars]");
  Clustering out;
  std::size_t base = states.size() / k;
  std::size_t extra = states.size() % k;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t len = base + (i < extra ? 1 : 0);
    Cluster c;
    c.name = "c" + std::to_string(i);
    c.vars.assign(states.begin() + pos, states.begin() + pos + len);
    out.clusters.push_back(std::move(c));
    pos += len;
  }
  return out;
}

inline Clustering single_cluster(const DbnModel& model) {
  return block_clustering(model, 1);
}

}  // namespace dbnmon
