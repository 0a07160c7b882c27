#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dbnmon/errors.hpp"
#include "dbnmon/particle_table.hpp"
#include "dbnmon/rng.hpp"

namespace dbnmon {

/// Per-cluster state prepared for sample_join: rows that can still reach a
/// full joined assignment, an index from bindings of already-set shared
/// variables to the consistent rows, and the compensation weight
/// |consistent set| / |pruned table| stored per row.
struct JoinPlanCluster {
  ParticleTable pruned;
  std::vector<VarId> bound_vars;               // shared with earlier clusters
  std::vector<std::size_t> bound_pos_full;     // positions of bound vars in the full schema
  std::vector<std::size_t> new_pos_table;      // positions of new vars within pruned rows
  std::vector<std::size_t> new_pos_full;       // where those vars land in the full schema
  detail::GroupMap groups;                     // binding -> consistent row indices
};

struct JoinPlan {
  std::vector<JoinPlanCluster> clusters;
  std::vector<VarId> schema;  // union of cluster schemas, in introduction order
};

/// Prunes rows that can never participate in the full equijoin (pairwise
/// semijoin reduction run to a global fixpoint) and precomputes, for each
/// cluster, the consistent-row sets keyed by bindings of the variables shared
/// with earlier clusters. Throws EmptyJoinError when some cluster prunes to
/// zero rows.
inline JoinPlan preprocess_sample_join(std::span<const ParticleTable> tables) {
  if (tables.empty())
    throw std::invalid_argument("preprocess_sample_join: need at least one table");
  for (const ParticleTable& t : tables) {
    if (t.weighted())
      throw std::invalid_argument("preprocess_sample_join: input tables must be unweighted");
    if (t.empty()) throw EmptyJoinError("sample-join input table is empty");
  }

  std::vector<ParticleTable> work(tables.begin(), tables.end());
  const std::size_t k = work.size();

  // shared positions per ordered pair, computed once
  struct SharedCols {
    std::vector<std::size_t> left, right;
  };
  std::vector<std::vector<SharedCols>> shared(k, std::vector<SharedCols>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      for (std::size_t p = 0; p < work[i].schema().size(); ++p) {
        auto q = work[j].find(work[i].schema()[p]);
        if (q) {
          shared[i][j].left.push_back(p);
          shared[i][j].right.push_back(*q);
        }
      }
    }

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        if (i == j || shared[i][j].left.empty()) continue;
        detail::GroupMap keys;
        std::vector<Value> key(shared[i][j].right.size());
        for (std::size_t r = 0; r < work[j].rows(); ++r) {
          auto row = work[j].row(r);
          for (std::size_t c = 0; c < key.size(); ++c) key[c] = row[shared[i][j].right[c]];
          keys[key];  // presence only
        }
        ParticleTable kept(work[i].schema());
        for (std::size_t r = 0; r < work[i].rows(); ++r) {
          auto row = work[i].row(r);
          for (std::size_t c = 0; c < key.size(); ++c) key[c] = row[shared[i][j].left[c]];
          if (keys.find(std::span<const Value>(key)) != keys.end()) kept.push_row(row);
        }
        if (kept.rows() != work[i].rows()) {
          changed = true;
          if (kept.empty())
            throw EmptyJoinError("sample-join preprocessing pruned a cluster to zero rows");
          work[i] = std::move(kept);
        }
      }
    }
  }

  JoinPlan plan;
  for (std::size_t c = 0; c < k; ++c) {
    JoinPlanCluster cluster;
    cluster.pruned = std::move(work[c]);
    std::vector<std::size_t> bound_pos_table;
    for (std::size_t p = 0; p < cluster.pruned.schema().size(); ++p) {
      VarId v = cluster.pruned.schema()[p];
      bool seen = false;
      for (std::size_t q = 0; q < plan.schema.size(); ++q) {
        if (plan.schema[q] == v) {
          cluster.bound_vars.push_back(v);
          bound_pos_table.push_back(p);
          cluster.bound_pos_full.push_back(q);
          seen = true;
          break;
        }
      }
      if (!seen) {
        cluster.new_pos_table.push_back(p);
        cluster.new_pos_full.push_back(plan.schema.size());
        plan.schema.push_back(v);
      }
    }
    const double rows = static_cast<double>(cluster.pruned.rows());
    std::vector<Value> key(bound_pos_table.size());
    for (std::size_t r = 0; r < cluster.pruned.rows(); ++r) {
      auto row = cluster.pruned.row(r);
      for (std::size_t c = 0; c < key.size(); ++c) key[c] = row[bound_pos_table[c]];
      cluster.groups[key].push_back(static_cast<std::uint32_t>(r));
    }
    std::vector<double> weights(cluster.pruned.rows());
    for (auto& [binding, group] : cluster.groups) {
      double w = static_cast<double>(group.size()) / rows;
      for (std::uint32_t r : group) weights[r] = w;
    }
    cluster.pruned.set_weights(std::move(weights));
    plan.clusters.push_back(std::move(cluster));
  }
  return plan;
}

struct SampleJoinStats {
  std::uint64_t attempts = 0;
  std::uint64_t discards = 0;

  double discard_rate() const {
    return attempts == 0 ? 0.0 : static_cast<double>(discards) / static_cast<double>(attempts);
  }
};

/// Draws n full particles from the product of cluster marginals: clusters are
/// visited in plan order, a consistent row is selected uniformly, and the
/// particle weight is multiplied by the consistency fraction. Samples that
/// hit an empty consistent set are thrown out and redrawn, so exactly n
/// particles come back; a sustained discard rate above 99.9% aborts.
inline ParticleTable sample_join(const JoinPlan& plan, std::size_t n, Rng& rng,
                                 SampleJoinStats* stats = nullptr) {
  if (plan.clusters.empty()) throw std::invalid_argument("sample_join: empty plan");
  if (n < 1) throw std::invalid_argument("sample_join: n must be >= 1");

  constexpr std::uint64_t kWindow = 10000;
  SampleJoinStats local;
  SampleJoinStats& st = stats ? *stats : local;
  std::uint64_t window_attempts = 0, window_discards = 0;

  ParticleTable out(plan.schema);
  out.reserve(n);
  std::vector<Value> buf(plan.schema.size());
  std::vector<Value> key;
  while (out.rows() < n) {
    ++st.attempts;
    ++window_attempts;
    double w = 1.0;
    bool dead = false;
    for (const JoinPlanCluster& cluster : plan.clusters) {
      key.resize(cluster.bound_pos_full.size());
      for (std::size_t c = 0; c < key.size(); ++c) key[c] = buf[cluster.bound_pos_full[c]];
      auto it = cluster.groups.find(std::span<const Value>(key));
      if (it == cluster.groups.end()) {
        dead = true;
        break;
      }
      const auto& group = it->second;
      std::uint32_t pick = group[rng.next_below(static_cast<std::uint32_t>(group.size()))];
      w *= static_cast<double>(group.size()) / static_cast<double>(cluster.pruned.rows());
      auto row = cluster.pruned.row(pick);
      for (std::size_t c = 0; c < cluster.new_pos_full.size(); ++c)
        buf[cluster.new_pos_full[c]] = row[cluster.new_pos_table[c]];
    }
    if (dead) {
      ++st.discards;
      ++window_discards;
    } else {
      out.push_row(buf, w);
    }
    if (window_attempts >= kWindow) {
      if (window_discards * 1000 > window_attempts * 999)
        throw InferenceError(
            "sample-join discard rate exceeded 99.9% over the last " +
            std::to_string(window_attempts) + " attempts (" +
            std::to_string(window_discards) + " discards); the cluster tables are "
            "pairwise consistent but admit almost no full joint assignment");
      window_attempts = window_discards = 0;
    }
  }
  return out;
}

}  // namespace dbnmon
