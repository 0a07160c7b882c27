#pragma once

#include <cmath>
#include <stdexcept>

#include "dbnmon/dense.hpp"
#include "dbnmon/filters.hpp"

namespace dbnmon {

/// KL(p || q) in nats, with 0 * ln 0 = 0. q must be strictly positive
/// wherever p is (guaranteed for smoothed beliefs).
inline double kl_divergence(const DenseDistribution& p, const DenseDistribution& q) {
  if (!p.same_schema(q))
    throw std::invalid_argument("kl_divergence: schema mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.probs.size(); ++i) {
    double pi = p.probs[i];
    if (pi == 0.0) continue;
    double qi = q.probs[i];
    if (qi <= 0.0)
      throw std::domain_error("kl_divergence: q is zero where p has mass");
    kl += pi * std::log(pi / qi);
  }
  return kl;
}

/// Comparable joint belief for the metric suite: the filter's own joint for
/// exact, the smoothed empirical joint for PF, the normalized product of
/// cluster marginals for BK and the FP algorithms.
inline DenseDistribution belief_to_joint(const Filter& filter, double eps_rel) {
  return filter.belief_joint(eps_rel);
}

}  // namespace dbnmon
