#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dbnmon/clustering.hpp"
#include "dbnmon/errors.hpp"
#include "dbnmon/model.hpp"
#include "dbnmon/particle_table.hpp"

namespace dbnmon {

/// Junction tree over the two-slice universe: ids [0, V) are current-slice
/// variables, ids [V, 2V) their previous-slice copies. Every 2-TBN family and
/// every cluster (at both slices) is contained in some clique.
struct CliqueTree {
  std::size_t base_vars = 0;  // V
  std::vector<int> cards;     // size 2V
  std::vector<std::vector<VarId>> cliques;  // sorted variable lists
  struct Edge {
    std::uint32_t a = 0, b = 0;
    std::vector<VarId> separator;
  };
  std::vector<Edge> edges;
  std::vector<std::vector<std::uint32_t>> neighbors;  // clique -> incident edge indices
  std::vector<std::uint32_t> prev_anchor;  // per cluster
  std::vector<std::uint32_t> cur_anchor;   // per cluster
};

inline VarId prev_slice_id(VarId v, std::size_t base_vars) {
  return v + static_cast<VarId>(base_vars);
}

namespace detail {

inline bool sorted_contains(const std::vector<VarId>& sorted, std::span<const VarId> wanted) {
  for (VarId v : wanted)
    if (!std::binary_search(sorted.begin(), sorted.end(), v)) return false;
  return true;
}

}  // namespace detail

/// Moralizes the 2-TBN (augmented with a pairwise clique over each cluster at
/// each slice), triangulates with min-fill (ties broken by smallest id), and
/// extracts the maximal cliques with a maximum-separator spanning tree.
inline CliqueTree build_clique_tree(const DbnModel& model, const Clustering& clustering) {
  auto violations = validate_clustering(clustering, model, false);
  if (!violations.empty())
    throw ValidationError("build_clique_tree: " + violations.front().where + ": " +
                          violations.front().message);

  CliqueTree tree;
  const std::size_t V = model.var_count();
  tree.base_vars = V;
  tree.cards.resize(2 * V);
  for (VarId v = 0; v < V; ++v) {
    tree.cards[v] = model.cardinality(v);
    tree.cards[v + V] = model.cardinality(v);
  }

  const std::size_t n = 2 * V;
  std::vector<char> active(n, 0);
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  auto connect = [&](std::span<const VarId> group) {
    for (VarId v : group) active[v] = 1;
    for (std::size_t i = 0; i < group.size(); ++i)
      for (std::size_t j = i + 1; j < group.size(); ++j) {
        adj[group[i]][group[j]] = 1;
        adj[group[j]][group[i]] = 1;
      }
  };

  std::vector<VarId> group;
  for (VarId v = 0; v < V; ++v) {
    group.clear();
    group.push_back(v);
    for (const ParentRef& p : model.transition[v].parents)
      group.push_back(p.slice == Slice::previous ? prev_slice_id(p.var, V) : p.var);
    connect(group);
  }
  for (const Cluster& c : clustering.clusters) {
    group.clear();
    for (VarId v : c.vars) group.push_back(prev_slice_id(v, V));
    connect(group);
    group.clear();
    for (VarId v : c.vars) group.push_back(v);
    connect(group);
  }

  // min-fill elimination
  std::vector<char> remaining = active;
  std::vector<std::vector<VarId>> elim_cliques;
  std::size_t left = 0;
  for (char a : remaining) left += a;
  while (left > 0) {
    std::size_t best = n;
    std::size_t best_fill = std::size_t(-1);
    std::vector<VarId> nbrs;
    for (std::size_t v = 0; v < n; ++v) {
      if (!remaining[v]) continue;
      nbrs.clear();
      for (std::size_t u = 0; u < n; ++u)
        if (remaining[u] && adj[v][u]) nbrs.push_back(static_cast<VarId>(u));
      std::size_t fill = 0;
      for (std::size_t i = 0; i < nbrs.size(); ++i)
        for (std::size_t j = i + 1; j < nbrs.size(); ++j)
          if (!adj[nbrs[i]][nbrs[j]]) ++fill;
      if (fill < best_fill) {
        best_fill = fill;
        best = v;
      }
    }
    nbrs.clear();
    for (std::size_t u = 0; u < n; ++u)
      if (remaining[u] && adj[best][u]) nbrs.push_back(static_cast<VarId>(u));
    std::vector<VarId> clique = nbrs;
    clique.push_back(static_cast<VarId>(best));
    std::sort(clique.begin(), clique.end());
    elim_cliques.push_back(std::move(clique));
    for (std::size_t i = 0; i < nbrs.size(); ++i)
      for (std::size_t j = i + 1; j < nbrs.size(); ++j) {
        adj[nbrs[i]][nbrs[j]] = 1;
        adj[nbrs[j]][nbrs[i]] = 1;
      }
    remaining[best] = 0;
    --left;
  }

  // keep maximal cliques only, first occurrence wins on duplicates
  for (std::size_t i = 0; i < elim_cliques.size(); ++i) {
    bool maximal = true;
    for (std::size_t j = 0; j < elim_cliques.size() && maximal; ++j) {
      if (i == j) continue;
      const auto& a = elim_cliques[i];
      const auto& b = elim_cliques[j];
      if (a.size() > b.size()) continue;
      if (a.size() == b.size() && !(j < i)) continue;
      if (std::includes(b.begin(), b.end(), a.begin(), a.end())) maximal = false;
    }
    if (maximal) tree.cliques.push_back(elim_cliques[i]);
  }
  if (tree.cliques.empty()) tree.cliques.push_back({});

  // maximum-separator spanning tree (Kruskal; zero separators connect the
  // components of disconnected models)
  struct Candidate {
    std::size_t weight;
    std::uint32_t a, b;
  };
  std::vector<Candidate> candidates;
  for (std::uint32_t i = 0; i < tree.cliques.size(); ++i)
    for (std::uint32_t j = i + 1; j < tree.cliques.size(); ++j) {
      std::vector<VarId> sep;
      std::set_intersection(tree.cliques[i].begin(), tree.cliques[i].end(),
                            tree.cliques[j].begin(), tree.cliques[j].end(),
                            std::back_inserter(sep));
      candidates.push_back({sep.size(), i, j});
    }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    if (x.weight != y.weight) return x.weight > y.weight;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  std::vector<std::uint32_t> parent(tree.cliques.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find_root = [&](std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  tree.neighbors.resize(tree.cliques.size());
  for (const Candidate& c : candidates) {
    std::uint32_t ra = find_root(c.a), rb = find_root(c.b);
    if (ra == rb) continue;
    parent[ra] = rb;
    CliqueTree::Edge e;
    e.a = c.a;
    e.b = c.b;
    std::set_intersection(tree.cliques[c.a].begin(), tree.cliques[c.a].end(),
                          tree.cliques[c.b].begin(), tree.cliques[c.b].end(),
                          std::back_inserter(e.separator));
    tree.neighbors[c.a].push_back(static_cast<std::uint32_t>(tree.edges.size()));
    tree.neighbors[c.b].push_back(static_cast<std::uint32_t>(tree.edges.size()));
    tree.edges.push_back(std::move(e));
  }

  for (const Cluster& c : clustering.clusters) {
    std::vector<VarId> prev_set, cur_set;
    for (VarId v : c.vars) {
      prev_set.push_back(prev_slice_id(v, V));
      cur_set.push_back(v);
    }
    std::uint32_t pa = std::uint32_t(-1), ca = std::uint32_t(-1);
    for (std::uint32_t i = 0; i < tree.cliques.size(); ++i) {
      if (pa == std::uint32_t(-1) && detail::sorted_contains(tree.cliques[i], prev_set)) pa = i;
      if (ca == std::uint32_t(-1) && detail::sorted_contains(tree.cliques[i], cur_set)) ca = i;
    }
    if (pa == std::uint32_t(-1) || ca == std::uint32_t(-1))
      throw Error("build_clique_tree: cluster not contained in any clique");
    tree.prev_anchor.push_back(pa);
    tree.cur_anchor.push_back(ca);
  }
  return tree;
}

/// Sparse potential of a CPT: one row per (parent assignment, child value)
/// with the conditional probability as weight; zero-probability rows are
/// omitted. When `base_vars` > 0, previous-slice parents map to their copy
/// ids.
inline ParticleTable dense_cpt_to_potential(const Cpt& cpt, const DbnModel& model,
                                            std::size_t base_vars = 0) {
  std::vector<VarId> schema;
  std::vector<int> cards;
  for (const ParentRef& p : cpt.parents) {
    schema.push_back(p.slice == Slice::previous && base_vars > 0
                         ? prev_slice_id(p.var, base_vars)
                         : p.var);
    cards.push_back(model.cardinality(p.var));
  }
  schema.push_back(cpt.child);
  const std::size_t child_card = static_cast<std::size_t>(model.cardinality(cpt.child));
  const std::size_t rows = cpt_row_count(cpt, model);

  ParticleTable out(std::move(schema));
  std::vector<Value> buf(cpt.parents.size() + 1, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t rest = r;
    for (std::size_t i = cpt.parents.size(); i-- > 0;) {
      buf[i] = static_cast<Value>(rest % static_cast<std::size_t>(cards[i]));
      rest /= static_cast<std::size_t>(cards[i]);
    }
    for (std::size_t v = 0; v < child_card; ++v) {
      double p = cpt.probs[r * child_card + v];
      if (p == 0.0) continue;
      buf[cpt.parents.size()] = static_cast<Value>(v);
      out.push_row(buf, p);
    }
  }
  return out;
}

namespace detail {

// Joins in unit tables (all values, weight 1) for any wanted variable missing
// from the schema, so projections onto separators and marginal targets are
// always defined. A variable mentioned by no factor behaves as a constant 1.
inline ParticleTable extend_uniform(ParticleTable table, std::span<const VarId> wanted,
                                    std::span<const int> cards) {
  for (VarId v : wanted) {
    if (table.find(v)) continue;
    ParticleTable unit({v});
    Value card = static_cast<Value>(cards[v]);
    for (Value val = 0; val < card; ++val)
      unit.push_row(std::span<const Value>(&val, 1));
    table = equijoin(table, unit);
  }
  return table;
}

}  // namespace detail

/// Calibration result: a merged potential per clique, all consistent with the
/// full factor product (restricted to evidence), plus the global mass.
struct CalibratedTree {
  const CliqueTree* tree = nullptr;
  std::vector<ParticleTable> beliefs;
  double total_mass = 0.0;
};

/// Division-free (Shafer-Shenoy) calibration over particle-table potentials.
/// Products are equijoins with weight multiplication, summations are
/// projections with duplicate merging. Evidence is absorbed up front by
/// filtering factor rows on the observed values.
inline CalibratedTree calibrate(const CliqueTree& tree, std::vector<ParticleTable> factors,
                                const Assignment& evidence) {
  // evidence absorption by row filtering
  for (ParticleTable& f : factors) {
    bool touched = false;
    for (std::size_t p = 0; p < f.schema().size() && !touched; ++p) {
      VarId v = f.schema()[p];
      if (v < tree.base_vars && v < evidence.size() && evidence.has(v)) touched = true;
    }
    if (!touched) continue;
    ParticleTable kept(f.schema());
    for (std::size_t i = 0; i < f.rows(); ++i) {
      auto row = f.row(i);
      bool ok = true;
      for (std::size_t p = 0; p < f.schema().size(); ++p) {
        VarId v = f.schema()[p];
        if (v < tree.base_vars && v < evidence.size() && evidence.has(v) &&
            row[p] != evidence.get(v)) {
          ok = false;
          break;
        }
      }
      if (ok) kept.push_row(row, f.weight(i));
    }
    f = std::move(kept);
  }

  // assign each factor to the first clique containing its schema
  std::vector<std::vector<std::size_t>> assigned(tree.cliques.size());
  for (std::size_t fi = 0; fi < factors.size(); ++fi) {
    bool placed = false;
    for (std::uint32_t c = 0; c < tree.cliques.size() && !placed; ++c) {
      if (detail::sorted_contains(tree.cliques[c], factors[fi].schema())) {
        assigned[c].push_back(fi);
        placed = true;
      }
    }
    if (!placed)
      throw std::invalid_argument("calibrate: factor schema fits in no clique");
  }

  // clique products, smallest supports first
  std::vector<ParticleTable> base(tree.cliques.size());
  for (std::uint32_t c = 0; c < tree.cliques.size(); ++c) {
    std::sort(assigned[c].begin(), assigned[c].end(), [&](std::size_t a, std::size_t b) {
      if (factors[a].rows() != factors[b].rows()) return factors[a].rows() < factors[b].rows();
      return a < b;
    });
    ParticleTable acc = ParticleTable::null_table();
    for (std::size_t fi : assigned[c]) acc = merge_duplicates(equijoin(acc, factors[fi]));
    base[c] = std::move(acc);
  }

  // Shafer-Shenoy messages over directed edges
  const std::size_t ecount = tree.edges.size();
  std::vector<ParticleTable> msg(2 * ecount);  // edge e: [e] a->b, [e + ecount] b->a

  auto other = [&](std::uint32_t edge, std::uint32_t from) {
    return tree.edges[edge].a == from ? tree.edges[edge].b : tree.edges[edge].a;
  };
  auto slot = [&](std::uint32_t edge, std::uint32_t from) {
    return tree.edges[edge].a == from ? edge : edge + ecount;
  };

  auto compute_message = [&](std::uint32_t from, std::uint32_t out_edge) {
    ParticleTable acc = base[from];
    for (std::uint32_t e : tree.neighbors[from]) {
      if (e == out_edge) continue;
      std::uint32_t in_slot = slot(e, other(e, from));
      acc = merge_duplicates(equijoin(acc, msg[in_slot]));
    }
    acc = detail::extend_uniform(std::move(acc), tree.edges[out_edge].separator, tree.cards);
    ParticleTable projected = project(acc, tree.edges[out_edge].separator);
    msg[slot(out_edge, from)] = merge_duplicates(projected);
  };

  // collect toward clique 0, then distribute, iteratively
  std::vector<std::pair<std::uint32_t, std::uint32_t>> order;  // (clique, edge toward parent)
  {
    std::vector<char> visited(tree.cliques.size(), 0);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> stack{{0, std::uint32_t(-1)}};
    while (!stack.empty()) {
      auto [c, pe] = stack.back();
      stack.pop_back();
      visited[c] = 1;
      if (pe != std::uint32_t(-1)) order.emplace_back(c, pe);
      for (std::uint32_t e : tree.neighbors[c]) {
        std::uint32_t nb = other(e, c);
        if (!visited[nb]) stack.emplace_back(nb, e);
      }
    }
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    compute_message(it->first, it->second);  // leaves toward the root
  for (auto& [c, pe] : order)
    compute_message(other(pe, c), pe);  // root outward

  CalibratedTree result;
  result.tree = &tree;
  result.beliefs.resize(tree.cliques.size());
  for (std::uint32_t c = 0; c < tree.cliques.size(); ++c) {
    ParticleTable acc = base[c];
    for (std::uint32_t e : tree.neighbors[c]) {
      std::uint32_t in_slot = slot(e, other(e, c));
      acc = merge_duplicates(equijoin(acc, msg[in_slot]));
    }
    result.beliefs[c] = std::move(acc);
  }
  result.total_mass = result.beliefs[0].total_weight();
  if (!(result.total_mass > 0.0))
    throw ImpossibleEvidenceError("calibration left zero total mass: evidence is impossible "
                                  "under the factored belief");
  return result;
}

/// Projects the potential of a clique covering `vars` onto them, merges
/// duplicates, and normalizes the weights to sum 1.
inline ParticleTable clique_marginal(const CalibratedTree& calibrated,
                                     std::span<const VarId> vars) {
  const CliqueTree& tree = *calibrated.tree;
  std::uint32_t home = std::uint32_t(-1);
  for (std::uint32_t c = 0; c < tree.cliques.size(); ++c) {
    if (detail::sorted_contains(tree.cliques[c], vars)) {
      home = c;
      break;
    }
  }
  if (home == std::uint32_t(-1))
    throw std::invalid_argument("clique_marginal: variables not covered by any clique");
  ParticleTable belief =
      detail::extend_uniform(calibrated.beliefs[home], vars, tree.cards);
  ParticleTable out = merge_duplicates(project(belief, vars));
  double total = out.total_weight();
  if (!(total > 0.0)) throw InferenceError("clique_marginal: zero-mass potential");
  std::vector<double> w(out.weights().begin(), out.weights().end());
  for (double& x : w) x /= total;
  out.set_weights(std::move(w));
  return out;
}

}  // namespace dbnmon
