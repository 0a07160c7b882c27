#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dbnmon/clustering.hpp"
#include "dbnmon/dense.hpp"
#include "dbnmon/errors.hpp"
#include "dbnmon/exact.hpp"
#include "dbnmon/junction_tree.hpp"
#include "dbnmon/model.hpp"
#include "dbnmon/particle_table.hpp"
#include "dbnmon/rng.hpp"
#include "dbnmon/sample_join.hpp"
#include "dbnmon/sampling.hpp"

namespace dbnmon {

enum class Algorithm { exact, pf, bk, fp1, fp2, fp3 };

inline const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::exact: return "exact";
    case Algorithm::pf: return "pf";
    case Algorithm::bk: return "bk";
    case Algorithm::fp1: return "fp1";
    case Algorithm::fp2: return "fp2";
    case Algorithm::fp3: return "fp3";
  }
  return "?";
}

inline std::optional<Algorithm> parse_algorithm(const std::string& s) {
  if (s == "exact") return Algorithm::exact;
  if (s == "pf") return Algorithm::pf;
  if (s == "bk") return Algorithm::bk;
  if (s == "fp1") return Algorithm::fp1;
  if (s == "fp2") return Algorithm::fp2;
  if (s == "fp3") return Algorithm::fp3;
  return std::nullopt;
}

struct FilterConfig {
  Algorithm algorithm = Algorithm::pf;
  std::size_t particles = 1000;                   // N for the full-particle phases
  std::optional<std::size_t> cluster_particles;   // N_c; defaults to `particles`
  Clustering clustering;                          // required for bk / fp modes
  ResampleScheme resample = ResampleScheme::systematic;
  std::uint64_t seed = 0;
  std::size_t join_row_cap = 1000000;             // fp1 equijoin guard
  double epsilon = 1e-6;                          // relative smoothing for belief readout
  ExactOptions exact;                             // exact / bk dense machinery
  // Optional premade engine shared across filters of the same model (the
  // transition matrix cache is expensive to rebuild per trial).
  std::shared_ptr<const ExactEngine> shared_engine;

  std::size_t effective_cluster_particles() const {
    return cluster_particles.value_or(particles);
  }
};

namespace detail {

struct Propagated {
  ParticleTable particles;   // schema = state variables (model order), weighted
  double sum_weights = 0.0;
  double sum_prior = 0.0;
};

// Extends every row through the 2-TBN in topological order; observed nodes
// are clamped and their likelihood multiplied into the row weight. Input
// weights act as multiplicative priors.
inline Propagated propagate_particles(const DbnModel& model, const ModelIndex& idx,
                                      const ParticleTable& in, const Assignment& obs,
                                      Rng& rng) {
  Propagated out;
  out.particles = ParticleTable(idx.state_vars);
  out.particles.reserve(in.rows());
  std::vector<Value> prev(model.var_count(), kUnset);
  std::vector<Value> cur(model.var_count(), kUnset);
  std::vector<Value> buf(idx.state_vars.size());
  for (std::size_t i = 0; i < in.rows(); ++i) {
    auto r = in.row(i);
    for (std::size_t j = 0; j < in.schema().size(); ++j) prev[in.schema()[j]] = r[j];
    double w = in.weight(i);
    out.sum_prior += w;
    for (VarId v : idx.trans_topo) {
      auto row = cpt_row(model.transition[v], model, prev, cur);
      if (model.variables[v].kind == VarKind::state) {
        cur[v] = sample_row(row, rng);
      } else {
        Value y = obs.get(v);
        w *= row[static_cast<std::size_t>(y)];
        cur[v] = y;
      }
    }
    for (std::size_t j = 0; j < buf.size(); ++j) buf[j] = cur[idx.state_vars[j]];
    out.particles.push_row(buf, w);
    out.sum_weights += w;
  }
  return out;
}

// Ancestral sampling of the prior network with observed slice-0 nodes
// clamped; returns n importance-weighted state rows.
inline ParticleTable sample_prior_particles(const DbnModel& model, const ModelIndex& idx,
                                            std::size_t n, const Assignment& obs0, Rng& rng,
                                            double& sum_weights) {
  ParticleTable out(idx.state_vars);
  out.reserve(n);
  std::vector<Value> cur(model.var_count(), kUnset);
  std::vector<Value> buf(idx.state_vars.size());
  std::span<const Value> no_prev;
  sum_weights = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double w = 1.0;
    for (VarId v : idx.prior_topo) {
      auto row = cpt_row(model.prior[v], model, no_prev, cur);
      if (model.variables[v].kind == VarKind::state) {
        cur[v] = sample_row(row, rng);
      } else {
        Value y = obs0.get(v);
        w *= row[static_cast<std::size_t>(y)];
        cur[v] = y;
      }
    }
    for (std::size_t j = 0; j < buf.size(); ++j) buf[j] = cur[idx.state_vars[j]];
    out.push_row(buf, w);
    sum_weights += w;
  }
  return out;
}

// Product of per-cluster marginal pieces over `vars`, renormalized with
// additive smoothing relative to the raw product mass.
inline DenseDistribution product_of_pieces(std::span<const VarId> vars,
                                           std::span<const int> model_cards,
                                           std::span<const DenseDistribution> pieces,
                                           double eps_rel) {
  std::vector<int> cards;
  for (VarId v : vars) cards.push_back(model_cards[v]);
  DenseDistribution out(std::vector<VarId>(vars.begin(), vars.end()), std::move(cards));

  // per piece: position of each piece variable inside `vars`
  std::vector<std::vector<std::size_t>> piece_pos(pieces.size());
  for (std::size_t p = 0; p < pieces.size(); ++p) {
    for (VarId v : pieces[p].schema) {
      for (std::size_t q = 0; q < vars.size(); ++q)
        if (vars[q] == v) {
          piece_pos[p].push_back(q);
          break;
        }
    }
  }

  std::vector<Value> values(vars.size(), 0);
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    double q = 1.0;
    for (std::size_t p = 0; p < pieces.size() && q != 0.0; ++p) {
      std::size_t sub = 0;
      for (std::size_t c = 0; c < piece_pos[p].size(); ++c)
        sub = sub * static_cast<std::size_t>(pieces[p].cards[c]) +
              static_cast<std::size_t>(values[piece_pos[p][c]]);
      q *= pieces[p].probs[sub];
    }
    out.probs[idx] = q;
    for (std::size_t i = vars.size(); i-- > 0;) {
      if (++values[i] < out.cards[i]) break;
      values[i] = 0;
    }
  }
  double total = out.total();
  double eps = eps_rel * (total > 0.0 ? total : 1.0);
  double denom = total + eps * static_cast<double>(out.size());
  if (!(denom > 0.0))
    throw InferenceError("factored belief has zero mass and no smoothing was requested");
  for (double& p : out.probs) p = (p + eps) / denom;
  return out;
}

}  // namespace detail

/// One monitoring algorithm behind the shared init/step/query interface.
/// init consumes the t = 0 observation; each step advances one time slice
/// and returns the log-likelihood increment log P(y_t | y_{0:t-1}) (its
/// estimate, for the particle methods).
class Filter {
 public:
  virtual ~Filter() = default;

  static std::unique_ptr<Filter> create(const FilterConfig& config, const DbnModel& model);

  virtual double init(const Assignment& obs0) = 0;
  virtual double step(const Assignment& obs) = 0;
  virtual DenseDistribution marginal(std::span<const VarId> vars, double eps_rel) const = 0;
  virtual DenseDistribution belief_joint(double eps_rel) const = 0;
  virtual const char* name() const = 0;

  std::size_t time_index() const { return t_; }
  double total_log_likelihood() const { return loglik_; }
  virtual std::size_t last_join_rows() const { return 0; }
  virtual double last_discard_rate() const { return 0.0; }

 protected:
  void check_init_state(bool want_initialized) const {
    if (want_initialized && !initialized_)
      throw std::logic_error("filter used before init");
    if (!want_initialized && initialized_)
      throw std::logic_error("filter initialized twice");
  }

  std::size_t t_ = 0;
  double loglik_ = 0.0;
  bool initialized_ = false;
};

namespace detail {

inline std::shared_ptr<const ExactEngine> obtain_engine(const FilterConfig& config,
                                                        const DbnModel& model) {
  if (config.shared_engine && &config.shared_engine->model() == &model)
    return config.shared_engine;
  return std::make_shared<ExactEngine>(model, config.exact);
}

}  // namespace detail

/// Exact recursive filtering on the explicit joint.
class ExactFilter final : public Filter {
 public:
  ExactFilter(const FilterConfig& config, const DbnModel& model)
      : engine_(detail::obtain_engine(config, model)) {}

  double init(const Assignment& obs0) override {
    check_init_state(false);
    auto r = engine_->condition(engine_->prior_belief(), obs0, NetworkKind::prior_net);
    posterior_ = std::move(r.posterior);
    initialized_ = true;
    loglik_ += r.log_likelihood;
    return r.log_likelihood;
  }

  double step(const Assignment& obs) override {
    check_init_state(true);
    auto r = engine_->condition(engine_->predict(posterior_), obs, NetworkKind::transition_net);
    posterior_ = std::move(r.posterior);
    ++t_;
    loglik_ += r.log_likelihood;
    return r.log_likelihood;
  }

  DenseDistribution marginal(std::span<const VarId> vars, double eps_rel) const override {
    check_init_state(true);
    return smoothed(posterior_.marginal(vars), eps_rel);
  }

  DenseDistribution belief_joint(double) const override {
    check_init_state(true);
    return posterior_;
  }

  const char* name() const override { return "exact"; }
  const DenseDistribution& posterior() const { return posterior_; }
  const ExactEngine& engine() const { return *engine_; }

 private:
  std::shared_ptr<const ExactEngine> engine_;
  DenseDistribution posterior_;
};

/// Boyen-Koller: exact propagation of a product-of-cluster-marginals belief,
/// with a projection back onto the clusters after every step.
class BkFilter final : public Filter {
 public:
  BkFilter(const FilterConfig& config, const DbnModel& model)
      : engine_(detail::obtain_engine(config, model)), clustering_(config.clustering) {
    auto violations = validate_clustering(clustering_, model, true);
    if (!violations.empty())
      throw ValidationError("bk clustering: " + violations.front().where + ": " +
                            violations.front().message);
    cards_ = model.cards();
  }

  double init(const Assignment& obs0) override {
    check_init_state(false);
    auto r = engine_->condition(engine_->prior_belief(), obs0, NetworkKind::prior_net);
    project_clusters(r.posterior);
    initialized_ = true;
    loglik_ += r.log_likelihood;
    return r.log_likelihood;
  }

  double step(const Assignment& obs) override {
    check_init_state(true);
    auto r = engine_->condition(engine_->predict(factored_joint()), obs,
                                NetworkKind::transition_net);
    project_clusters(r.posterior);
    ++t_;
    loglik_ += r.log_likelihood;
    return r.log_likelihood;
  }

  DenseDistribution marginal(std::span<const VarId> vars, double eps_rel) const override {
    check_init_state(true);
    std::vector<DenseDistribution> pieces = marginal_pieces(vars);
    return detail::product_of_pieces(vars, cards_, pieces, eps_rel);
  }

  DenseDistribution belief_joint(double eps_rel) const override {
    check_init_state(true);
    std::vector<DenseDistribution> pieces(beliefs_.begin(), beliefs_.end());
    return detail::product_of_pieces(engine_->schema(), cards_, pieces, eps_rel);
  }

  const char* name() const override { return "bk"; }
  const std::vector<DenseDistribution>& cluster_beliefs() const { return beliefs_; }

 private:
  void project_clusters(const DenseDistribution& joint) {
    beliefs_.clear();
    for (const Cluster& c : clustering_.clusters) beliefs_.push_back(joint.marginal(c.vars));
  }

  DenseDistribution factored_joint() const {
    std::vector<DenseDistribution> pieces(beliefs_.begin(), beliefs_.end());
    return detail::product_of_pieces(engine_->schema(), cards_, pieces, 0.0);
  }

  std::vector<DenseDistribution> marginal_pieces(std::span<const VarId> vars) const {
    std::vector<DenseDistribution> pieces;
    for (std::size_t c = 0; c < clustering_.clusters.size(); ++c) {
      std::vector<VarId> overlap;
      for (VarId v : clustering_.clusters[c].vars)
        for (VarId w : vars)
          if (v == w) {
            overlap.push_back(v);
            break;
          }
      if (!overlap.empty()) pieces.push_back(beliefs_[c].marginal(overlap));
    }
    return pieces;
  }

  std::shared_ptr<const ExactEngine> engine_;
  Clustering clustering_;
  std::vector<int> cards_;
  std::vector<DenseDistribution> beliefs_;
};

/// Bootstrap particle filter with the transition prior as proposal.
class PfFilter : public Filter {
 public:
  PfFilter(const FilterConfig& config, const DbnModel& model)
      : model_(&model), idx_(model), config_(config), rng_(config.seed) {
    if (config.particles < 1) throw ValidationError("pf: particles must be >= 1");
  }

  double init(const Assignment& obs0) override {
    check_init_state(false);
    double inc = init_particles(config_.particles, obs0);
    initialized_ = true;
    return inc;
  }

  double step(const Assignment& obs) override {
    check_init_state(true);
    auto prop = detail::propagate_particles(*model_, idx_, particles_, obs, rng_);
    if (!(prop.sum_weights > 0.0))
      throw DepletionError("pf: all particle weights are zero at step " +
                           std::to_string(t_ + 1));
    double inc = std::log(prop.sum_weights / prop.sum_prior);
    particles_ = resample(prop.particles, config_.particles, config_.resample, rng_);
    ++t_;
    loglik_ += inc;
    return inc;
  }

  DenseDistribution marginal(std::span<const VarId> vars, double eps_rel) const override {
    check_init_state(true);
    ParticleTable sub = project(particles_, vars);
    return to_dense(sub, idx_.cards, eps_rel * sub.total_weight());
  }

  DenseDistribution belief_joint(double eps_rel) const override {
    check_init_state(true);
    return to_dense(particles_, idx_.cards, eps_rel * particles_.total_weight());
  }

  const char* name() const override { return "pf"; }
  const ParticleTable& particles() const { return particles_; }

 protected:
  // shared by the FP initializers (which draw N_c full particles the same way)
  double init_particles(std::size_t n, const Assignment& obs0) {
    double sum = 0.0;
    ParticleTable weighted =
        detail::sample_prior_particles(*model_, idx_, n, obs0, rng_, sum);
    if (!(sum > 0.0))
      throw DepletionError("init: the t = 0 observation has zero probability under "
                           "every sampled particle");
    particles_ = resample(weighted, n, config_.resample, rng_);
    double inc = std::log(sum / static_cast<double>(n));
    loglik_ += inc;
    return inc;
  }

  const DbnModel* model_;
  ModelIndex idx_;
  FilterConfig config_;
  Rng rng_;
  ParticleTable particles_;
};

/// Shared machinery for the factored-particle algorithms: one unweighted
/// table per cluster, belief readout as a product of cluster empiricals.
class FpFilterBase : public Filter {
 public:
  FpFilterBase(const FilterConfig& config, const DbnModel& model)
      : model_(&model), idx_(model), config_(config), rng_(config.seed),
        clustering_(config.clustering) {
    auto violations = validate_clustering(clustering_, model, false);
    if (!violations.empty())
      throw ValidationError("fp clustering: " + violations.front().where + ": " +
                            violations.front().message);
    if (config.particles < 1 || config.effective_cluster_particles() < 1)
      throw ValidationError("fp: particle counts must be >= 1");
  }

  double init(const Assignment& obs0) override {
    check_init_state(false);
    std::size_t n = config_.effective_cluster_particles();
    double sum = 0.0;
    ParticleTable weighted =
        detail::sample_prior_particles(*model_, idx_, n, obs0, rng_, sum);
    if (!(sum > 0.0))
      throw DepletionError("init: the t = 0 observation has zero probability under "
                           "every sampled particle");
    ParticleTable full = resample(weighted, n, config_.resample, rng_);
    project_to_clusters(full);
    initialized_ = true;
    double inc = std::log(sum / static_cast<double>(n));
    loglik_ += inc;
    return inc;
  }

  DenseDistribution marginal(std::span<const VarId> vars, double eps_rel) const override {
    check_init_state(true);
    std::vector<DenseDistribution> pieces;
    for (std::size_t c = 0; c < clustering_.clusters.size(); ++c) {
      std::vector<VarId> overlap;
      for (VarId v : clustering_.clusters[c].vars)
        for (VarId w : vars)
          if (v == w) {
            overlap.push_back(v);
            break;
          }
      if (overlap.empty()) continue;
      pieces.push_back(to_dense(project(tables_[c], overlap), idx_.cards, 0.0));
    }
    return detail::product_of_pieces(vars, idx_.cards, pieces, eps_rel);
  }

  DenseDistribution belief_joint(double eps_rel) const override {
    check_init_state(true);
    std::vector<DenseDistribution> pieces;
    for (std::size_t c = 0; c < clustering_.clusters.size(); ++c)
      pieces.push_back(to_dense(tables_[c], idx_.cards, 0.0));
    return detail::product_of_pieces(idx_.state_vars, idx_.cards, pieces, eps_rel);
  }

  const std::vector<ParticleTable>& cluster_tables() const { return tables_; }

 protected:
  void project_to_clusters(const ParticleTable& full) {
    tables_.clear();
    for (const Cluster& c : clustering_.clusters) tables_.push_back(project(full, c.vars));
  }

  const DbnModel* model_;
  ModelIndex idx_;
  FilterConfig config_;
  Rng rng_;
  Clustering clustering_;
  std::vector<ParticleTable> tables_;  // per cluster, unweighted
};

/// FP1: exact equijoin of the cluster tables, then a full PF step.
class Fp1Filter final : public FpFilterBase {
 public:
  using FpFilterBase::FpFilterBase;

  double step(const Assignment& obs) override {
    check_init_state(true);
    ParticleTable joined = equijoin_all(tables_, config_.join_row_cap);
    join_rows_ = joined.rows();
    auto prop = detail::propagate_particles(*model_, idx_, joined, obs, rng_);
    if (!(prop.sum_weights > 0.0))
      throw DepletionError("fp1: all particle weights are zero at step " +
                           std::to_string(t_ + 1));
    double inc = std::log(prop.sum_weights / prop.sum_prior);
    ParticleTable full =
        resample(prop.particles, config_.particles, config_.resample, rng_);
    project_to_clusters(full);
    ++t_;
    loglik_ += inc;
    return inc;
  }

  const char* name() const override { return "fp1"; }
  std::size_t last_join_rows() const override { return join_rows_; }

 private:
  std::size_t join_rows_ = 0;
};

/// FP2: the equijoin is replaced by importance sampling from the product of
/// cluster marginals; sample-join weights ride along as priors on the PF
/// weights.
class Fp2Filter final : public FpFilterBase {
 public:
  using FpFilterBase::FpFilterBase;

  double step(const Assignment& obs) override {
    check_init_state(true);
    JoinPlan plan = preprocess_sample_join(tables_);
    SampleJoinStats stats;
    ParticleTable joined = sample_join(plan, config_.particles, rng_, &stats);
    discard_rate_ = stats.discard_rate();
    auto prop = detail::propagate_particles(*model_, idx_, joined, obs, rng_);
    if (!(prop.sum_weights > 0.0))
      throw DepletionError("fp2: all particle weights are zero at step " +
                           std::to_string(t_ + 1));
    double inc = std::log(prop.sum_weights / prop.sum_prior);
    ParticleTable full =
        resample(prop.particles, config_.particles, config_.resample, rng_);
    project_to_clusters(full);
    ++t_;
    loglik_ += inc;
    return inc;
  }

  const char* name() const override { return "fp2"; }
  double last_discard_rate() const override { return discard_rate_; }

 private:
  double discard_rate_ = 0.0;
};

/// FP3: the factored particles never become full particles; the previous
/// cluster tables are multiplied into a junction tree over the 2-TBN and the
/// new tables are resampled from the calibrated cluster marginals.
class Fp3Filter final : public FpFilterBase {
 public:
  Fp3Filter(const FilterConfig& config, const DbnModel& model)
      : FpFilterBase(config, model),
        tree_(build_clique_tree(model, config.clustering)) {
    for (VarId v = 0; v < model.var_count(); ++v)
      cpt_potentials_.push_back(
          dense_cpt_to_potential(model.transition[v], model, tree_.base_vars));
  }

  double step(const Assignment& obs) override {
    check_init_state(true);
    std::vector<ParticleTable> factors = cpt_potentials_;
    double log_prior_mass = 0.0;
    for (std::size_t c = 0; c < tables_.size(); ++c) {
      ParticleTable prev = tables_[c];
      std::vector<VarId> schema;
      for (VarId v : prev.schema()) schema.push_back(prev_slice_id(v, tree_.base_vars));
      prev.rename_schema(std::move(schema));
      log_prior_mass += std::log(prev.total_weight());
      factors.push_back(std::move(prev));
    }
    CalibratedTree calib = calibrate(tree_, std::move(factors), obs);
    double inc = std::log(calib.total_mass) - log_prior_mass;
    std::size_t nc = config_.effective_cluster_particles();
    std::vector<ParticleTable> next;
    for (const Cluster& c : clustering_.clusters) {
      ParticleTable marg = clique_marginal(calib, c.vars);
      next.push_back(resample(marg, nc, config_.resample, rng_));
    }
    tables_ = std::move(next);
    ++t_;
    loglik_ += inc;
    return inc;
  }

  const char* name() const override { return "fp3"; }
  const CliqueTree& clique_tree() const { return tree_; }

 private:
  CliqueTree tree_;
  std::vector<ParticleTable> cpt_potentials_;
};

inline std::unique_ptr<Filter> Filter::create(const FilterConfig& config,
                                              const DbnModel& model) {
  switch (config.algorithm) {
    case Algorithm::exact: return std::make_unique<ExactFilter>(config, model);
    case Algorithm::pf: return std::make_unique<PfFilter>(config, model);
    case Algorithm::bk: return std::make_unique<BkFilter>(config, model);
    case Algorithm::fp1: return std::make_unique<Fp1Filter>(config, model);
    case Algorithm::fp2: return std::make_unique<Fp2Filter>(config, model);
    case Algorithm::fp3: return std::make_unique<Fp3Filter>(config, model);
  }
  throw std::invalid_argument("unknown algorithm");
}

inline DenseDistribution query_marginal(const Filter& filter, std::span<const VarId> vars,
                                        double eps_rel) {
  return filter.marginal(vars, eps_rel);
}

}  // namespace dbnmon
