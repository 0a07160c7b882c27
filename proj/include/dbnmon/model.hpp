#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dbnmon/errors.hpp"

namespace dbnmon {

using VarId = std::uint32_t;
using Value = std::int32_t;

inline constexpr Value kUnset = -1;
inline constexpr double kRowSumTolerance = 1e-9;

enum class VarKind { state, observation };
enum class Slice { previous, current };

struct Variable {
  std::string name;
  int cardinality = 2;
  VarKind kind = VarKind::state;

  bool operator==(const Variable&) const = default;
};

struct ParentRef {
  VarId var = 0;
  Slice slice = Slice::current;

  bool operator==(const ParentRef&) const = default;
};

/// Conditional probability table. `probs` holds one distribution over the
/// child per joint parent assignment, row-major: parent assignments are
/// enumerated lexicographically with the first listed parent most
/// significant.
struct Cpt {
  VarId child = 0;
  std::vector<ParentRef> parents;
  std::vector<double> probs;

  bool operator==(const Cpt&) const = default;
};

/// Discrete DBN: a prior network over slice-0 variables plus a two-slice
/// transition network in which parents are tagged previous/current.
struct DbnModel {
  std::vector<Variable> variables;
  std::vector<Cpt> prior;       // indexed by child VarId, parents all current
  std::vector<Cpt> transition;  // indexed by child VarId

  bool operator==(const DbnModel&) const = default;

  std::size_t var_count() const { return variables.size(); }
  int cardinality(VarId v) const { return variables[v].cardinality; }
  const std::string& name(VarId v) const { return variables[v].name; }

  std::optional<VarId> find(const std::string& name) const {
    for (VarId v = 0; v < variables.size(); ++v)
      if (variables[v].name == name) return v;
    return std::nullopt;
  }

  std::vector<VarId> state_vars() const {
    std::vector<VarId> out;
    for (VarId v = 0; v < variables.size(); ++v)
      if (variables[v].kind == VarKind::state) out.push_back(v);
    return out;
  }

  std::vector<VarId> observation_vars() const {
    std::vector<VarId> out;
    for (VarId v = 0; v < variables.size(); ++v)
      if (variables[v].kind == VarKind::observation) out.push_back(v);
    return out;
  }

  std::vector<int> cards() const {
    std::vector<int> out(variables.size());
    for (VarId v = 0; v < variables.size(); ++v) out[v] = variables[v].cardinality;
    return out;
  }
};

/// Partial map from variable id to value index; kUnset marks absent entries.
class Assignment {
 public:
  Assignment() = default;
  explicit Assignment(std::size_t var_count) : values_(var_count, kUnset) {}

  std::size_t size() const { return values_.size(); }
  bool has(VarId v) const { return values_[v] != kUnset; }
  Value get(VarId v) const { return values_[v]; }
  void set(VarId v, Value value) { values_[v] = value; }
  void unset(VarId v) { values_[v] = kUnset; }
  std::span<const Value> raw() const { return values_; }
  std::span<Value> raw() { return values_; }

  bool complete_over(std::span<const VarId> vars) const {
    for (VarId v : vars)
      if (!has(v)) return false;
    return true;
  }

  bool operator==(const Assignment&) const = default;

 private:
  std::vector<Value> values_;
};

/// Hidden/observed slices indexed by t = 0..T. `hidden` may be empty for an
/// observations-only trajectory.
struct Trajectory {
  std::vector<Assignment> hidden;
  std::vector<Assignment> observed;

  std::size_t slices() const { return observed.size(); }
  bool has_hidden() const { return !hidden.empty(); }

  bool operator==(const Trajectory&) const = default;
};

struct Violation {
  std::string where;
  std::string message;
};

namespace detail {

inline std::size_t checked_joint_size(std::span<const int> cards) {
  std::size_t n = 1;
  for (int c : cards) {
    if (c <= 0) return 0;
    if (n > (std::numeric_limits<std::size_t>::max() / 2) / static_cast<std::size_t>(c))
      return std::numeric_limits<std::size_t>::max();
    n *= static_cast<std::size_t>(c);
  }
  return n;
}

// Kahn topological sort picking the smallest ready id first, so the order is
// a pure function of the graph. Returns nullopt on a cycle.
inline std::optional<std::vector<VarId>> topological_order(
    std::size_t n, const std::vector<std::pair<VarId, VarId>>& edges) {
  std::vector<std::vector<VarId>> children(n);
  std::vector<std::size_t> indegree(n, 0);
  for (auto [from, to] : edges) {
    children[from].push_back(to);
    ++indegree[to];
  }
  std::vector<VarId> ready;
  for (VarId v = 0; v < n; ++v)
    if (indegree[v] == 0) ready.push_back(v);
  std::vector<VarId> order;
  order.reserve(n);
  while (!ready.empty()) {
    auto it = std::min_element(ready.begin(), ready.end());
    VarId v = *it;
    ready.erase(it);
    order.push_back(v);
    for (VarId c : children[v])
      if (--indegree[c] == 0) ready.push_back(c);
  }
  if (order.size() != n) return std::nullopt;
  return order;
}

}  // namespace detail

inline std::size_t cpt_row_count(const Cpt& cpt, const DbnModel& model) {
  std::size_t rows = 1;
  for (const ParentRef& p : cpt.parents)
    rows *= static_cast<std::size_t>(model.cardinality(p.var));
  return rows;
}

/// Row index for the given parent values; previous-slice parents read from
/// `prev`, current-slice parents from `cur`.
inline std::size_t cpt_row_index(const Cpt& cpt, const DbnModel& model,
                                 std::span<const Value> prev,
                                 std::span<const Value> cur) {
  std::size_t row = 0;
  for (const ParentRef& p : cpt.parents) {
    Value v = p.slice == Slice::previous ? prev[p.var] : cur[p.var];
    row = row * static_cast<std::size_t>(model.cardinality(p.var)) +
          static_cast<std::size_t>(v);
  }
  return row;
}

inline std::span<const double> cpt_row(const Cpt& cpt, const DbnModel& model,
                                       std::span<const Value> prev,
                                       std::span<const Value> cur) {
  std::size_t card = static_cast<std::size_t>(model.cardinality(cpt.child));
  std::size_t row = cpt_row_index(cpt, model, prev, cur);
  return std::span<const double>(cpt.probs.data() + row * card, card);
}

namespace detail {

inline void validate_cpt(const DbnModel& model, const Cpt& cpt, bool is_prior,
                         std::vector<Violation>& out) {
  const std::string where =
      (is_prior ? "prior cpt of " : "transition cpt of ") + model.name(cpt.child);
  for (const ParentRef& p : cpt.parents) {
    if (p.var >= model.var_count()) {
      out.push_back({where, "parent id out of range"});
      return;
    }
    if (is_prior && p.slice == Slice::previous)
      out.push_back({where, "prior network parents must live in slice 0"});
    if (model.variables[p.var].kind == VarKind::observation &&
        model.variables[cpt.child].kind == VarKind::state)
      out.push_back({where, "state variable has observation parent '" +
                                model.name(p.var) + "'"});
    if (!is_prior && model.variables[cpt.child].kind == VarKind::observation &&
        p.slice == Slice::previous)
      out.push_back({where, "observation variable depends on the previous slice"});
  }
  std::size_t rows = cpt_row_count(cpt, model);
  std::size_t card = static_cast<std::size_t>(model.cardinality(cpt.child));
  if (cpt.probs.size() != rows * card) {
    out.push_back({where, "probability table has " + std::to_string(cpt.probs.size()) +
                              " entries, expected " + std::to_string(rows * card)});
    return;
  }
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    bool in_range = true;
    for (std::size_t k = 0; k < card; ++k) {
      double p = cpt.probs[r * card + k];
      if (p < 0.0 || p > 1.0) in_range = false;
      sum += p;
    }
    if (!in_range) {
      out.push_back({where, "row " + std::to_string(r) + " has entries outside [0,1]"});
      break;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      out.push_back({where, "row " + std::to_string(r) + " sums to " +
                                std::to_string(sum) + ", expected 1"});
      break;
    }
  }
}

}  // namespace detail

/// Checks every structural invariant and returns the violations found; an
/// empty result means the model is valid. Violations are data, not failures.
inline std::vector<Violation> validate_model(const DbnModel& model) {
  std::vector<Violation> out;
  for (VarId v = 0; v < model.var_count(); ++v) {
    const Variable& var = model.variables[v];
    if (var.cardinality < 2)
      out.push_back({"variable " + var.name, "cardinality must be >= 2"});
    if (var.name.empty())
      out.push_back({"variable #" + std::to_string(v), "empty name"});
    for (char c : var.name)
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'))
        out.push_back({"variable " + var.name,
                       "name contains characters unusable in CSV/cluster syntax"});
    for (VarId w = v + 1; w < model.var_count(); ++w)
      if (model.variables[w].name == var.name)
        out.push_back({"variable " + var.name, "duplicate name"});
  }
  if (model.prior.size() != model.var_count())
    out.push_back({"prior", "expected exactly one cpt per variable"});
  if (model.transition.size() != model.var_count())
    out.push_back({"transition", "expected exactly one cpt per variable"});
  if (!out.empty() && (model.prior.size() != model.var_count() ||
                       model.transition.size() != model.var_count()))
    return out;

  for (VarId v = 0; v < model.var_count(); ++v) {
    if (model.prior[v].child != v)
      out.push_back({"prior cpt #" + std::to_string(v), "child id mismatch"});
    if (model.transition[v].child != v)
      out.push_back({"transition cpt #" + std::to_string(v), "child id mismatch"});
    detail::validate_cpt(model, model.prior[v], true, out);
    detail::validate_cpt(model, model.transition[v], false, out);
  }

  // Intra-slice acyclicity for the prior graph and the current-slice part of
  // the transition network.
  auto check_acyclic = [&](const std::vector<Cpt>& cpts, const char* label) {
    std::vector<std::pair<VarId, VarId>> edges;
    for (const Cpt& c : cpts)
      for (const ParentRef& p : c.parents)
        if (p.slice == Slice::current && p.var < model.var_count())
          edges.emplace_back(p.var, c.child);
    if (!detail::topological_order(model.var_count(), edges))
      out.push_back({label, "intra-slice edges form a cycle"});
  };
  check_acyclic(model.prior, "prior");
  check_acyclic(model.transition, "transition");
  return out;
}

/// Precomputed traversal data shared by samplers and filters. Construction
/// requires a valid model.
struct ModelIndex {
  std::vector<VarId> state_vars;
  std::vector<VarId> obs_vars;
  std::vector<VarId> prior_topo;  // all slice-0 variables
  std::vector<VarId> trans_topo;  // all current-slice variables
  std::vector<int> cards;

  explicit ModelIndex(const DbnModel& model)
      : state_vars(model.state_vars()),
        obs_vars(model.observation_vars()),
        cards(model.cards()) {
    auto topo = [&](const std::vector<Cpt>& cpts) {
      std::vector<std::pair<VarId, VarId>> edges;
      for (const Cpt& c : cpts)
        for (const ParentRef& p : c.parents)
          if (p.slice == Slice::current) edges.emplace_back(p.var, c.child);
      auto order = detail::topological_order(model.var_count(), edges);
      if (!order) throw ValidationError("model has an intra-slice cycle");
      return *order;
    };
    prior_topo = topo(model.prior);
    trans_topo = topo(model.transition);
  }
};

}  // namespace dbnmon
