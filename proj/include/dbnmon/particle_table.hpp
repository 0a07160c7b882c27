#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "dbnmon/dense.hpp"
#include "dbnmon/errors.hpp"
#include "dbnmon/model.hpp"
#include "dbnmon/rng.hpp"

namespace dbnmon {

namespace detail {

struct ValueSpanHash {
  using is_transparent = void;
  std::size_t operator()(std::span<const Value> key) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (Value v : key) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(v));
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
  std::size_t operator()(const std::vector<Value>& key) const {
    return (*this)(std::span<const Value>(key));
  }
};

struct ValueSpanEq {
  using is_transparent = void;
  template <class A, class B>
  bool operator()(const A& a, const B& b) const {
    std::span<const Value> x(a), y(b);
    return x.size() == y.size() && std::equal(x.begin(), x.end(), y.begin());
  }
};

// key -> row indices in insertion (= table) order
using GroupMap =
    std::unordered_map<std::vector<Value>, std::vector<std::uint32_t>, ValueSpanHash, ValueSpanEq>;

}  // namespace detail

/// Schema-tagged list of value rows with optional nonnegative weights. The
/// universal currency for particles, factored particles, potentials and
/// CPTs. Duplicate rows are intentionally permitted; multiplicity encodes
/// empirical frequency.
class ParticleTable {
 public:
  ParticleTable() = default;
  explicit ParticleTable(std::vector<VarId> schema) : schema_(std::move(schema)) {}

  /// Zero-variable table with a single unit row: the multiplicative identity
  /// of equijoin.
  static ParticleTable null_table() {
    ParticleTable t;
    t.rows_ = 1;
    return t;
  }

  const std::vector<VarId>& schema() const { return schema_; }
  std::size_t arity() const { return schema_.size(); }
  std::size_t rows() const { return rows_; }
  bool empty() const { return rows_ == 0; }
  bool weighted() const { return !weights_.empty(); }

  std::span<const Value> row(std::size_t i) const {
    return std::span<const Value>(values_.data() + i * arity(), arity());
  }
  double weight(std::size_t i) const { return weights_.empty() ? 1.0 : weights_[i]; }
  std::span<const double> weights() const { return weights_; }

  double total_weight() const {
    if (weights_.empty()) return static_cast<double>(rows_);
    double t = 0.0;
    for (double w : weights_) t += w;
    return t;
  }

  void reserve(std::size_t n) {
    values_.reserve(n * arity());
    if (weighted()) weights_.reserve(n);
  }

  void push_row(std::span<const Value> values) {
    values_.insert(values_.end(), values.begin(), values.end());
    ++rows_;
    if (!weights_.empty()) weights_.push_back(1.0);
  }

  /// Appends a row with an explicit weight; the table becomes weighted.
  void push_row(std::span<const Value> values, double w) {
    if (weights_.empty()) weights_.assign(rows_, 1.0);
    values_.insert(values_.end(), values.begin(), values.end());
    ++rows_;
    weights_.push_back(w);
  }

  /// Replaces all weights; one entry per row.
  void set_weights(std::vector<double> w) {
    if (w.size() != rows_) throw std::invalid_argument("set_weights: size mismatch");
    weights_ = std::move(w);
  }

  void clear_weights() { weights_.clear(); }

  std::optional<std::size_t> find(VarId v) const {
    for (std::size_t i = 0; i < schema_.size(); ++i)
      if (schema_[i] == v) return i;
    return std::nullopt;
  }

  /// Relabels schema variables in place (used to move tables between the
  /// current-slice and previous-slice id spaces).
  void rename_schema(std::vector<VarId> schema) {
    if (schema.size() != schema_.size())
      throw std::invalid_argument("rename_schema: arity mismatch");
    schema_ = std::move(schema);
  }

  bool operator==(const ParticleTable&) const = default;

 private:
  std::vector<VarId> schema_;
  std::vector<Value> values_;
  std::vector<double> weights_;  // empty means every row has weight 1
  std::size_t rows_ = 0;
};

/// Row-wise restriction onto `vars`: row i of the output is row i of the
/// input restricted to vars. Row count, order and weights are preserved;
/// identical rows are not merged.
inline ParticleTable project(const ParticleTable& table, std::span<const VarId> vars) {
  std::vector<std::size_t> positions;
  positions.reserve(vars.size());
  for (VarId v : vars) {
    auto pos = table.find(v);
    if (!pos) throw std::invalid_argument("project: variable not in table schema");
    positions.push_back(*pos);
  }
  ParticleTable out(std::vector<VarId>(vars.begin(), vars.end()));
  out.reserve(table.rows());
  std::vector<Value> buf(vars.size());
  for (std::size_t i = 0; i < table.rows(); ++i) {
    auto r = table.row(i);
    for (std::size_t j = 0; j < positions.size(); ++j) buf[j] = r[positions[j]];
    if (table.weighted())
      out.push_row(buf, table.weight(i));
    else
      out.push_row(buf);
  }
  return out;
}

/// Natural equijoin: one output row per pair of input rows that agree on all
/// shared variables; disjoint schemas produce the full cross product. Output
/// weights are products of the pair's weights. Throws JoinBlowupError when
/// the output would exceed `row_cap`.
inline ParticleTable equijoin(const ParticleTable& r, const ParticleTable& s,
                              std::size_t row_cap = std::size_t(-1)) {
  std::vector<std::size_t> r_shared, s_shared;
  std::vector<std::size_t> s_extra;
  std::vector<VarId> schema = r.schema();
  for (std::size_t j = 0; j < s.schema().size(); ++j) {
    auto pos = r.find(s.schema()[j]);
    if (pos) {
      r_shared.push_back(*pos);
      s_shared.push_back(j);
    } else {
      s_extra.push_back(j);
      schema.push_back(s.schema()[j]);
    }
  }

  ParticleTable out(std::move(schema));
  const bool want_weights = r.weighted() || s.weighted();
  std::vector<Value> buf(out.arity());
  auto emit = [&](std::size_t i, std::size_t j) {
    if (out.rows() >= row_cap)
      throw JoinBlowupError("equijoin produced more than " + std::to_string(row_cap) + " rows");
    auto rrow = r.row(i);
    std::copy(rrow.begin(), rrow.end(), buf.begin());
    auto srow = s.row(j);
    for (std::size_t k = 0; k < s_extra.size(); ++k)
      buf[r.arity() + k] = srow[s_extra[k]];
    if (want_weights)
      out.push_row(buf, r.weight(i) * s.weight(j));
    else
      out.push_row(buf);
  };

  if (r_shared.empty()) {
    for (std::size_t i = 0; i < r.rows(); ++i)
      for (std::size_t j = 0; j < s.rows(); ++j) emit(i, j);
    return out;
  }

  detail::GroupMap index;
  std::vector<Value> key(s_shared.size());
  for (std::size_t j = 0; j < s.rows(); ++j) {
    auto srow = s.row(j);
    for (std::size_t k = 0; k < s_shared.size(); ++k) key[k] = srow[s_shared[k]];
    index[key].push_back(static_cast<std::uint32_t>(j));
  }
  for (std::size_t i = 0; i < r.rows(); ++i) {
    auto rrow = r.row(i);
    for (std::size_t k = 0; k < r_shared.size(); ++k) key[k] = rrow[r_shared[k]];
    auto it = index.find(std::span<const Value>(key));
    if (it == index.end()) continue;
    for (std::uint32_t j : it->second) emit(i, j);
  }
  return out;
}

/// Left fold of equijoin over at least one table. The result, as a multiset
/// of weighted rows, does not depend on the fold order.
inline ParticleTable equijoin_all(std::span<const ParticleTable> tables,
                                  std::size_t row_cap = std::size_t(-1)) {
  if (tables.empty()) throw std::invalid_argument("equijoin_all: need at least one table");
  ParticleTable acc = tables[0];
  for (std::size_t i = 1; i < tables.size(); ++i) acc = equijoin(acc, tables[i], row_cap);
  if (acc.rows() > row_cap)
    throw JoinBlowupError("equijoin produced more than " + std::to_string(row_cap) + " rows");
  return acc;
}

/// Coalesces identical rows, summing their weights; first-occurrence order.
/// The result represents the same measure with a minimal support.
inline ParticleTable merge_duplicates(const ParticleTable& table) {
  ParticleTable out(table.schema());
  std::vector<double> sums;
  detail::GroupMap seen;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    auto r = table.row(i);
    auto it = seen.find(r);
    if (it == seen.end()) {
      std::vector<Value> key(r.begin(), r.end());
      seen.emplace(std::move(key), std::vector<std::uint32_t>{static_cast<std::uint32_t>(sums.size())});
      out.push_row(r);
      sums.push_back(table.weight(i));
    } else {
      sums[it->second[0]] += table.weight(i);
    }
  }
  out.set_weights(std::move(sums));
  return out;
}

enum class ResampleScheme { multinomial, systematic };

/// Draws n rows with replacement proportional to weight; the output carries
/// unit weights. Throws DepletionError when the total weight is zero.
inline ParticleTable resample(const ParticleTable& table, std::size_t n,
                              ResampleScheme scheme, Rng& rng) {
  if (n < 1) throw std::invalid_argument("resample: n must be >= 1");
  std::vector<double> cumulative(table.rows());
  double total = 0.0;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    double w = table.weight(i);
    if (w < 0.0) throw std::invalid_argument("resample: negative weight");
    total += w;
    cumulative[i] = total;
  }
  if (!(total > 0.0)) throw DepletionError("particle depletion: total weight is zero");

  ParticleTable out(table.schema());
  out.reserve(n);
  if (scheme == ResampleScheme::multinomial) {
    for (std::size_t i = 0; i < n; ++i) {
      double u = rng.next_double() * total;
      auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
      std::size_t idx = std::min<std::size_t>(it - cumulative.begin(), table.rows() - 1);
      out.push_row(table.row(idx));
    }
  } else {
    double u0 = rng.next_double();
    double step = total / static_cast<double>(n);
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double pos = (static_cast<double>(i) + u0) * step;
      while (idx + 1 < table.rows() && cumulative[idx] <= pos) ++idx;
      out.push_row(table.row(idx));
    }
  }
  return out;
}

/// Empirical measure as an explicit joint table with additive smoothing:
/// P(a) = (mass on a + eps) / (total + eps * joint size). cards is indexed
/// by variable id and must cover every schema id.
inline DenseDistribution to_dense(const ParticleTable& table, std::span<const int> cards,
                                  double eps = 0.0) {
  std::vector<int> sub;
  sub.reserve(table.arity());
  for (VarId v : table.schema()) sub.push_back(cards[v]);
  DenseDistribution out(table.schema(), std::move(sub));
  double total = 0.0;
  for (std::size_t i = 0; i < table.rows(); ++i) {
    double w = table.weight(i);
    out.probs[out.index_of(table.row(i))] += w;
    total += w;
  }
  double denom = total + eps * static_cast<double>(out.size());
  if (!(denom > 0.0))
    throw std::invalid_argument("to_dense: empty table requires eps > 0");
  for (double& p : out.probs) p = (p + eps) / denom;
  return out;
}

}  // namespace dbnmon
