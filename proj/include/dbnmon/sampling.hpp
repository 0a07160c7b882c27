#pragma once

#include <span>
#include <stdexcept>

#include "dbnmon/model.hpp"
#include "dbnmon/rng.hpp"

namespace dbnmon {

namespace detail {

inline Value sample_row(std::span<const double> row, Rng& rng) {
  return static_cast<Value>(rng.sample_weighted(row, 1.0));
}

}  // namespace detail

/// Ancestral sample of the prior network: a complete assignment over all
/// slice-0 variables (state and observation).
inline Assignment sample_slice0(const DbnModel& model, const ModelIndex& idx, Rng& rng) {
  Assignment a(model.var_count());
  std::span<const Value> empty;
  for (VarId v : idx.prior_topo) {
    auto row = cpt_row(model.prior[v], model, empty, a.raw());
    a.set(v, detail::sample_row(row, rng));
  }
  return a;
}

inline Assignment sample_slice0(const DbnModel& model, Rng& rng) {
  return sample_slice0(model, ModelIndex(model), rng);
}

/// One step through the 2-TBN given the previous slice. `prev` must be
/// complete over the state variables.
inline Assignment sample_transition(const DbnModel& model, const ModelIndex& idx,
                                    const Assignment& prev, Rng& rng) {
  if (!prev.complete_over(idx.state_vars))
    throw std::invalid_argument("sample_transition: previous assignment incomplete over state variables");
  Assignment a(model.var_count());
  for (VarId v : idx.trans_topo) {
    auto row = cpt_row(model.transition[v], model, prev.raw(), a.raw());
    a.set(v, detail::sample_row(row, rng));
  }
  return a;
}

inline Assignment sample_transition(const DbnModel& model, const Assignment& prev, Rng& rng) {
  return sample_transition(model, ModelIndex(model), prev, rng);
}

namespace detail {

inline void split_slice(const DbnModel& model, const ModelIndex& idx,
                        const Assignment& full, Trajectory& traj) {
  Assignment hidden(model.var_count());
  Assignment observed(model.var_count());
  for (VarId v : idx.state_vars) hidden.set(v, full.get(v));
  for (VarId v : idx.obs_vars) observed.set(v, full.get(v));
  traj.hidden.push_back(std::move(hidden));
  traj.observed.push_back(std::move(observed));
}

}  // namespace detail

/// Forward simulation for `steps` transitions: a trajectory with slices
/// t = 0..steps.
inline Trajectory simulate(const DbnModel& model, std::size_t steps, Rng& rng) {
  ModelIndex idx(model);
  Trajectory traj;
  Assignment cur = sample_slice0(model, idx, rng);
  detail::split_slice(model, idx, cur, traj);
  for (std::size_t t = 1; t <= steps; ++t) {
    // transitions read only state variables from the previous slice
    cur = sample_transition(model, idx, cur, rng);
    detail::split_slice(model, idx, cur, traj);
  }
  return traj;
}

}  // namespace dbnmon
