#pragma once

#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "dbnmon/errors.hpp"
#include "dbnmon/model.hpp"

namespace dbnmon {

/// Explicit joint probability table over an ordered variable schema. Flat
/// indexing is row-major with the first schema variable most significant,
/// matching the Cpt row convention.
struct DenseDistribution {
  std::vector<VarId> schema;
  std::vector<int> cards;  // aligned with schema
  std::vector<double> probs;

  DenseDistribution() = default;
  DenseDistribution(std::vector<VarId> schema_, std::vector<int> cards_)
      : schema(std::move(schema_)), cards(std::move(cards_)) {
    probs.assign(detail::checked_joint_size(cards), 0.0);
  }

  std::size_t size() const { return probs.size(); }

  static DenseDistribution uniform(std::vector<VarId> schema_, std::vector<int> cards_) {
    DenseDistribution d(std::move(schema_), std::move(cards_));
    double p = 1.0 / static_cast<double>(d.size());
    for (double& x : d.probs) x = p;
    return d;
  }

  /// Flat index of the given values (aligned with schema).
  std::size_t index_of(std::span<const Value> values) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < schema.size(); ++i)
      idx = idx * static_cast<std::size_t>(cards[i]) + static_cast<std::size_t>(values[i]);
    return idx;
  }

  void decode(std::size_t index, std::span<Value> out) const {
    for (std::size_t i = schema.size(); i-- > 0;) {
      out[i] = static_cast<Value>(index % static_cast<std::size_t>(cards[i]));
      index /= static_cast<std::size_t>(cards[i]);
    }
  }

  double total() const { return std::accumulate(probs.begin(), probs.end(), 0.0); }

  /// Rescales to sum 1 and returns the pre-normalization total.
  double normalize() {
    double t = total();
    if (t <= 0.0) throw InferenceError("cannot normalize a zero-mass distribution");
    for (double& p : probs) p /= t;
    return t;
  }

  /// Marginal onto `vars` (kept in the given order).
  DenseDistribution marginal(std::span<const VarId> vars) const {
    std::vector<int> sub_cards;
    std::vector<std::size_t> positions;
    for (VarId v : vars) {
      bool found = false;
      for (std::size_t i = 0; i < schema.size(); ++i) {
        if (schema[i] == v) {
          positions.push_back(i);
          sub_cards.push_back(cards[i]);
          found = true;
          break;
        }
      }
      if (!found) throw std::invalid_argument("marginal variable not in schema");
    }
    DenseDistribution out(std::vector<VarId>(vars.begin(), vars.end()), std::move(sub_cards));
    std::vector<Value> values(schema.size(), 0);
    for (std::size_t idx = 0; idx < probs.size(); ++idx) {
      std::size_t sub = 0;
      for (std::size_t i = 0; i < positions.size(); ++i)
        sub = sub * static_cast<std::size_t>(out.cards[i]) +
              static_cast<std::size_t>(values[positions[i]]);
      out.probs[sub] += probs[idx];
      // odometer increment, last variable fastest
      for (std::size_t i = schema.size(); i-- > 0;) {
        if (++values[i] < cards[i]) break;
        values[i] = 0;
      }
    }
    return out;
  }

  bool same_schema(const DenseDistribution& other) const {
    return schema == other.schema && cards == other.cards;
  }
};

/// Additive smoothing: (p + eps) / (total + eps * size). eps is an absolute
/// per-state mass.
inline DenseDistribution smoothed(const DenseDistribution& d, double eps) {
  DenseDistribution out = d;
  double t = d.total();
  double denom = t + eps * static_cast<double>(d.size());
  if (denom <= 0.0) throw InferenceError("smoothing a zero-mass distribution with eps = 0");
  for (double& p : out.probs) p = (p + eps) / denom;
  return out;
}

}  // namespace dbnmon
