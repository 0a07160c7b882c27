#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "dbnmon/model.hpp"
#include "dbnmon/rng.hpp"

namespace dbnmon {

namespace detail {

// Noisy-channel observation child: P(y = x) = accuracy.
inline void add_observation_children(DbnModel& model, double accuracy) {
  std::vector<VarId> states = model.state_vars();
  for (VarId s : states) {
    VarId y = static_cast<VarId>(model.variables.size());
    model.variables.push_back({model.name(s) + "_obs", 2, VarKind::observation});
    Cpt obs;
    obs.child = y;
    obs.parents = {{s, Slice::current}};
    obs.probs = {accuracy, 1.0 - accuracy, 1.0 - accuracy, accuracy};
    model.prior.push_back(obs);
    obs.parents = {{s, Slice::current}};
    model.transition.push_back(std::move(obs));
  }
}

inline std::vector<double> random_binary_rows(std::size_t rows, Rng& rng) {
  std::vector<double> probs;
  probs.reserve(rows * 2);
  for (std::size_t r = 0; r < rows; ++r) {
    double p = rng.next_double();
    probs.push_back(p);
    probs.push_back(1.0 - p);
  }
  return probs;
}

// p drawn uniformly from (0, skew) on one arm or (1 - skew, 1) on the other,
// equal mass on both.
inline std::vector<double> skewed_binary_rows(std::size_t rows, double skew, Rng& rng) {
  std::vector<double> probs;
  probs.reserve(rows * 2);
  for (std::size_t r = 0; r < rows; ++r) {
    double u;
    do {
      u = rng.next_double();
    } while (u == 0.0);
    double p = rng.next_double() < 0.5 ? u * skew : 1.0 - u * skew;
    probs.push_back(p);
    probs.push_back(1.0 - p);
  }
  return probs;
}

}  // namespace detail

inline constexpr double kGeneratedObsAccuracy = 0.9;

/// Two strongly coupled blocks of binary state variables. Within a block,
/// every variable has the whole block (previous slice) as parents; exactly
/// `cross_edges` extra parent links are placed uniformly at random between
/// the blocks. CPT rows are uniform random; each state variable gets a
/// binary noisy observation child.
inline DbnModel generate_two_cluster_model(std::size_t nodes_per_cluster,
                                           std::size_t cross_edges, Rng& rng) {
  if (nodes_per_cluster < 1)
    throw std::invalid_argument("generate_two_cluster_model: nodes_per_cluster must be >= 1");
  const std::size_t k = nodes_per_cluster;
  const std::size_t n = 2 * k;
  const std::size_t slots = 2 * k * k;  // (child, other-block parent) pairs
  if (cross_edges > slots)
    throw std::invalid_argument("generate_two_cluster_model: cross_edges exceeds the " +
                                std::to_string(slots) + " available slots");

  DbnModel model;
  for (std::size_t i = 0; i < k; ++i)
    model.variables.push_back({"a" + std::to_string(i), 2, VarKind::state});
  for (std::size_t i = 0; i < k; ++i)
    model.variables.push_back({"b" + std::to_string(i), 2, VarKind::state});

  // partial Fisher-Yates over the flat slot enumeration
  std::vector<std::size_t> slot(slots);
  for (std::size_t i = 0; i < slots; ++i) slot[i] = i;
  std::vector<std::vector<VarId>> cross(n);
  for (std::size_t e = 0; e < cross_edges; ++e) {
    std::size_t j = e + rng.next_below(static_cast<std::uint32_t>(slots - e));
    std::swap(slot[e], slot[j]);
    std::size_t s = slot[e];
    VarId child = static_cast<VarId>(s / k);
    VarId parent = static_cast<VarId>(child < k ? k + s % k : s % k);
    cross[child].push_back(parent);
  }

  for (VarId v = 0; v < n; ++v) {
    Cpt prior;
    prior.child = v;
    prior.probs = detail::random_binary_rows(1, rng);
    model.prior.push_back(std::move(prior));

    Cpt trans;
    trans.child = v;
    std::size_t block_start = v < k ? 0 : k;
    for (std::size_t i = 0; i < k; ++i)
      trans.parents.push_back({static_cast<VarId>(block_start + i), Slice::previous});
    for (VarId p : cross[v]) trans.parents.push_back({p, Slice::previous});
    trans.probs = detail::random_binary_rows(std::size_t(1) << trans.parents.size(), rng);
    model.transition.push_back(std::move(trans));
  }

  detail::add_observation_children(model, kGeneratedObsAccuracy);
  return model;
}

/// n binary state variables, each with `parents_per_node` distinct parents
/// drawn uniformly from the previous slice and no intra-slice state edges.
/// All state CPT rows are (p, 1-p) with p close to 0 or 1 (within `skew`);
/// each state variable gets a binary noisy observation child.
inline DbnModel generate_random_parent_model(std::size_t n, std::size_t parents_per_node,
                                             double skew, Rng& rng) {
  if (n < 1) throw std::invalid_argument("generate_random_parent_model: n must be >= 1");
  if (parents_per_node >= n)
    throw std::invalid_argument("generate_random_parent_model: parents_per_node must be < n");
  if (!(skew > 0.0 && skew < 0.5))
    throw std::invalid_argument("generate_random_parent_model: skew must lie in (0, 0.5)");

  DbnModel model;
  for (std::size_t i = 0; i < n; ++i)
    model.variables.push_back({"x" + std::to_string(i), 2, VarKind::state});

  for (VarId v = 0; v < n; ++v) {
    Cpt prior;
    prior.child = v;
    prior.probs = detail::skewed_binary_rows(1, skew, rng);
    model.prior.push_back(std::move(prior));

    Cpt trans;
    trans.child = v;
    // distinct parents via partial Fisher-Yates
    std::vector<VarId> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = static_cast<VarId>(i);
    for (std::size_t e = 0; e < parents_per_node; ++e) {
      std::size_t j = e + rng.next_below(static_cast<std::uint32_t>(n - e));
      std::swap(pool[e], pool[j]);
      trans.parents.push_back({pool[e], Slice::previous});
    }
    trans.probs = detail::skewed_binary_rows(std::size_t(1) << parents_per_node, skew, rng);
    model.transition.push_back(std::move(trans));
  }

  detail::add_observation_children(model, kGeneratedObsAccuracy);
  return model;
}

}  // namespace dbnmon
