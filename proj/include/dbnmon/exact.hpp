#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dbnmon/dense.hpp"
#include "dbnmon/errors.hpp"
#include "dbnmon/model.hpp"

namespace dbnmon {

struct ExactOptions {
  std::size_t joint_cap = std::size_t(1) << 20;
  // Transition matrix cache is built when the joint size stays below this;
  // it turns each predict into one dense mat-vec.
  std::size_t matrix_limit = std::size_t(1) << 11;
  bool build_matrix = true;
};

enum class NetworkKind { prior_net, transition_net };

/// Recursive exact filter over the explicit joint distribution of the state
/// variables. Serves as a usable filter on small models and as ground truth
/// for the approximate algorithms.
class ExactEngine {
 public:
  ExactEngine(const DbnModel& model, ExactOptions opt = {})
      : model_(&model), opt_(opt), idx_(model) {
    schema_ = idx_.state_vars;
    for (VarId v : schema_) cards_.push_back(model.cardinality(v));
    joint_size_ = detail::checked_joint_size(cards_);
    if (joint_size_ > opt_.joint_cap)
      throw JointTooLargeError("joint state space of " + std::to_string(joint_size_) +
                               " exceeds the cap of " + std::to_string(opt_.joint_cap) +
                               "; exact monitoring is infeasible here");
    strides_.assign(model.var_count(), 0);
    std::size_t stride = 1;
    for (std::size_t i = schema_.size(); i-- > 0;) {
      strides_[schema_[i]] = stride;
      stride *= static_cast<std::size_t>(cards_[i]);
    }
    for (VarId v : idx_.prior_topo)
      if (model.variables[v].kind == VarKind::state) prior_state_order_.push_back(v);
    for (VarId v : idx_.trans_topo)
      if (model.variables[v].kind == VarKind::state) trans_state_order_.push_back(v);
    if (opt_.build_matrix && joint_size_ <= opt_.matrix_limit) build_matrix();
  }

  const std::vector<VarId>& schema() const { return schema_; }
  const std::vector<int>& cards() const { return cards_; }
  std::size_t joint_size() const { return joint_size_; }
  const DbnModel& model() const { return *model_; }

  /// Marginal prior distribution over the state variables at t = 0.
  DenseDistribution prior_belief() const {
    DenseDistribution out(schema_, cards_);
    std::vector<Value> cur(model_->var_count(), kUnset);
    expand(prior_state_order_, model_->prior, {}, cur, 0, 1.0, 0, out.probs.data());
    out.normalize();
    return out;
  }

  /// One transition update: sum over previous states of belief * P(next|prev).
  DenseDistribution predict(const DenseDistribution& belief) const {
    check_schema(belief);
    DenseDistribution out(schema_, cards_);
    if (!matrix_.empty()) {
      const std::size_t n = joint_size_;
      for (std::size_t prev = 0; prev < n; ++prev) {
        double w = belief.probs[prev];
        if (w == 0.0) continue;
        const double* row = matrix_.data() + prev * n;
        for (std::size_t cur = 0; cur < n; ++cur) out.probs[cur] += w * row[cur];
      }
    } else {
      std::vector<Value> prev(model_->var_count(), kUnset);
      std::vector<Value> cur(model_->var_count(), kUnset);
      std::vector<Value> decoded(schema_.size());
      for (std::size_t p = 0; p < joint_size_; ++p) {
        double w = belief.probs[p];
        if (w == 0.0) continue;
        belief.decode(p, decoded);
        for (std::size_t i = 0; i < schema_.size(); ++i) prev[schema_[i]] = decoded[i];
        expand(trans_state_order_, model_->transition, prev, cur, 0, w, 0, out.probs.data());
      }
    }
    out.normalize();
    return out;
  }

  struct Conditioned {
    DenseDistribution posterior;
    double log_likelihood = 0.0;
  };

  /// Multiplies in the observation likelihoods and renormalizes; the returned
  /// log-likelihood is log P(y_t | y_{0:t-1}).
  Conditioned condition(const DenseDistribution& belief, const Assignment& obs,
                        NetworkKind which = NetworkKind::transition_net) const {
    check_schema(belief);
    if (!obs.complete_over(idx_.obs_vars))
      throw std::invalid_argument("condition: observation assignment incomplete");
    const std::vector<Cpt>& cpts =
        which == NetworkKind::prior_net ? model_->prior : model_->transition;
    Conditioned result;
    result.posterior = DenseDistribution(schema_, cards_);
    std::vector<Value> scratch(model_->var_count(), kUnset);
    for (VarId v : idx_.obs_vars) scratch[v] = obs.get(v);
    std::vector<Value> decoded(schema_.size());
    double total = 0.0;
    for (std::size_t i = 0; i < joint_size_; ++i) {
      double w = belief.probs[i];
      if (w == 0.0) continue;
      belief.decode(i, decoded);
      for (std::size_t j = 0; j < schema_.size(); ++j) scratch[schema_[j]] = decoded[j];
      double like = 1.0;
      for (VarId v : idx_.obs_vars) {
        auto row = cpt_row(cpts[v], *model_, scratch, scratch);
        like *= row[static_cast<std::size_t>(obs.get(v))];
        if (like == 0.0) break;
      }
      double m = w * like;
      result.posterior.probs[i] = m;
      total += m;
    }
    if (total <= 0.0)
      throw ImpossibleEvidenceError("observation has probability zero under the current belief");
    for (double& p : result.posterior.probs) p /= total;
    result.log_likelihood = std::log(total);
    return result;
  }

 private:
  void check_schema(const DenseDistribution& d) const {
    if (d.schema != schema_ || d.cards != cards_)
      throw std::invalid_argument("belief schema does not match the model state variables");
  }

  // Enumerates assignments of `order` in topological order, multiplying CPT
  // entries as soon as each child is assigned; accumulates products into
  // out[index], where index is built from per-variable output strides.
  void expand(const std::vector<VarId>& order, const std::vector<Cpt>& cpts,
              std::span<const Value> prev, std::vector<Value>& cur, std::size_t depth,
              double weight, std::size_t out_index, double* out) const {
    if (depth == order.size()) {
      out[out_index] += weight;
      return;
    }
    VarId v = order[depth];
    auto row = cpt_row(cpts[v], *model_, prev, cur);
    std::size_t stride = strides_[v];
    for (Value val = 0; val < static_cast<Value>(row.size()); ++val) {
      double p = row[static_cast<std::size_t>(val)];
      if (p == 0.0) continue;
      cur[v] = val;
      expand(order, cpts, prev, cur, depth + 1, weight * p,
             out_index + static_cast<std::size_t>(val) * stride, out);
    }
    cur[v] = kUnset;
  }

  void build_matrix() {
    const std::size_t n = joint_size_;
    matrix_.assign(n * n, 0.0);
    std::vector<Value> prev(model_->var_count(), kUnset);
    std::vector<Value> cur(model_->var_count(), kUnset);
    std::vector<Value> decoded(schema_.size());
    DenseDistribution probe(schema_, cards_);
    for (std::size_t p = 0; p < n; ++p) {
      probe.decode(p, decoded);
      for (std::size_t i = 0; i < schema_.size(); ++i) prev[schema_[i]] = decoded[i];
      expand(trans_state_order_, model_->transition, prev, cur, 0, 1.0, 0,
             matrix_.data() + p * n);
    }
  }

  const DbnModel* model_;
  ExactOptions opt_;
  ModelIndex idx_;
  std::vector<VarId> schema_;
  std::vector<int> cards_;
  std::vector<std::size_t> strides_;
  std::vector<VarId> prior_state_order_;
  std::vector<VarId> trans_state_order_;
  std::size_t joint_size_ = 0;
  std::vector<double> matrix_;
};

inline DenseDistribution exact_predict(const DenseDistribution& belief, const DbnModel& model) {
  ExactOptions opt;
  opt.build_matrix = false;
  return ExactEngine(model, opt).predict(belief);
}

inline std::pair<DenseDistribution, double> exact_condition(
    const DenseDistribution& prior, const DbnModel& model, const Assignment& obs,
    NetworkKind which = NetworkKind::transition_net) {
  ExactOptions opt;
  opt.build_matrix = false;
  auto r = ExactEngine(model, opt).condition(prior, obs, which);
  return {std::move(r.posterior), r.log_likelihood};
}

struct ExactStep {
  DenseDistribution posterior;
  double log_likelihood = 0.0;
};

/// Posterior belief and per-step log-likelihood for every t. observations[t]
/// must be complete over the observation variables.
inline std::vector<ExactStep> exact_filter(const DbnModel& model,
                                           std::span<const Assignment> observations,
                                           ExactOptions opt = {}) {
  if (observations.empty())
    throw std::invalid_argument("exact_filter: need at least the t = 0 observation");
  ExactEngine engine(model, opt);
  std::vector<ExactStep> out;
  out.reserve(observations.size());
  auto first = engine.condition(engine.prior_belief(), observations[0], NetworkKind::prior_net);
  out.push_back({std::move(first.posterior), first.log_likelihood});
  for (std::size_t t = 1; t < observations.size(); ++t) {
    auto predicted = engine.predict(out.back().posterior);
    auto step = engine.condition(predicted, observations[t], NetworkKind::transition_net);
    out.push_back({std::move(step.posterior), step.log_likelihood});
  }
  return out;
}

}  // namespace dbnmon
