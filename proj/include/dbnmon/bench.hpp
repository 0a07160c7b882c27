#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dbnmon/errors.hpp"
#include "dbnmon/filters.hpp"
#include "dbnmon/generators.hpp"
#include "dbnmon/io.hpp"
#include "dbnmon/metrics.hpp"
#include "dbnmon/sampling.hpp"

namespace dbnmon {

struct GeneratorSpec {
  std::string topology;  // "two-cluster" | "random-parents"
  std::size_t nodes = 5;
  std::size_t cross_edges = 2;
  std::size_t parents = 3;
  double skew = 0.1;
  std::uint64_t seed = 0;
};

inline DbnModel build_model(const GeneratorSpec& spec) {
  Rng rng = Rng::derive(spec.seed, 0x6d6f64656cULL);
  if (spec.topology == "two-cluster")
    return generate_two_cluster_model(spec.nodes, spec.cross_edges, rng);
  if (spec.topology == "random-parents")
    return generate_random_parent_model(spec.nodes, spec.parents, spec.skew, rng);
  throw ValidationError("unknown generator topology '" + spec.topology + "'");
}

struct AlgorithmSpec {
  std::string label;  // unique name in outputs; defaults to the algorithm name
  FilterConfig config;
  std::optional<std::string> clusters_text;   // resolved against the model at run time
  std::optional<std::size_t> auto_blocks;     // contiguous block clustering
  bool calibrate_particles = true;            // participates in time equalization
};

struct ExperimentConfig {
  std::optional<std::string> model_file;
  std::optional<GeneratorSpec> generator;
  std::size_t steps = 10;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  bool time_budget = false;
  std::string time_reference;   // label; empty = slowest non-particle algorithm,
                                // else the first particle algorithm at its configured N
  double time_tolerance = 0.15;
  std::size_t warmup_steps = 5;
  bool compute_kl = false;
  std::size_t threads = 0;      // 0 = hardware concurrency
  std::vector<AlgorithmSpec> algorithms;
};

struct MetricsRecord {
  std::size_t trial = 0;
  std::size_t t = 0;
  std::string algorithm;
  std::string metric;  // kl_joint | kl_marginal_mean | nll_increment | wall_ms |
                       // particle_count | join_rows | discard_rate | failure
  double value = 0.0;
};

namespace detail {

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = seed;
  splitmix64(x);
  x ^= 0x9e3779b97f4a7c15ULL * (a + 1);
  splitmix64(x);
  x ^= 0xd1342543de82ef95ULL * (b + 1);
  return splitmix64(x);
}

inline bool is_particle_algorithm(Algorithm a) {
  return a == Algorithm::pf || a == Algorithm::fp1 || a == Algorithm::fp2 ||
         a == Algorithm::fp3;
}

inline double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

// Mean wall time per step() call at the given config, warmup trajectory as
// input. Repeats whole runs until enough time accumulates for a stable
// estimate.
inline double measure_step_ms(const DbnModel& model, const FilterConfig& config,
                              const Trajectory& warmup) {
  double total_ms = 0.0;
  std::size_t total_steps = 0;
  int runs = 0;
  while ((total_ms < 25.0 && runs < 12) || runs < 2) {
    FilterConfig cfg = config;
    cfg.seed = derive_seed(config.seed, 0xbeefULL, static_cast<std::uint64_t>(runs));
    auto filter = Filter::create(cfg, model);
    filter->init(warmup.observed[0]);
    auto start = std::chrono::steady_clock::now();
    for (std::size_t t = 1; t < warmup.slices(); ++t) filter->step(warmup.observed[t]);
    total_ms += ms_since(start);
    total_steps += warmup.slices() - 1;
    ++runs;
  }
  return total_ms / static_cast<double>(total_steps);
}

}  // namespace detail

/// Scales each particle algorithm's count until its measured per-iteration
/// wall time matches the reference within the configured tolerance. Returns
/// the chosen counts by label.
inline std::map<std::string, std::size_t> equalize_particle_counts(
    const ExperimentConfig& config, const DbnModel& model,
    std::vector<AlgorithmSpec>& algorithms) {
  Rng rng = Rng::derive(config.seed, 0x7761726d7570ULL);
  Trajectory warmup = simulate(model, std::max<std::size_t>(config.warmup_steps, 2), rng);

  // reference time per iteration
  double target_ms = -1.0;
  std::string reference = config.time_reference;
  if (reference.empty()) {
    for (const AlgorithmSpec& a : algorithms)
      if (!detail::is_particle_algorithm(a.config.algorithm)) {
        double ms = detail::measure_step_ms(model, a.config, warmup);
        if (ms > target_ms) target_ms = ms;
      }
  } else {
    for (const AlgorithmSpec& a : algorithms)
      if (a.label == reference)
        target_ms = detail::measure_step_ms(model, a.config, warmup);
    if (target_ms < 0.0)
      throw ValidationError("time_reference '" + reference + "' matches no algorithm");
  }
  std::string pinned_label;  // first particle algorithm anchors the budget itself
  if (target_ms < 0.0) {
    for (const AlgorithmSpec& a : algorithms) {
      if (detail::is_particle_algorithm(a.config.algorithm)) {
        target_ms = detail::measure_step_ms(model, a.config, warmup);
        pinned_label = a.label;
        break;
      }
    }
  }
  if (target_ms < 0.0) throw ValidationError("time budget requested but nothing to measure");

  std::map<std::string, std::size_t> counts;
  for (AlgorithmSpec& a : algorithms) {
    if (!detail::is_particle_algorithm(a.config.algorithm)) continue;
    counts[a.label] = a.config.particles;
    if (!a.calibrate_particles || a.label == pinned_label || a.label == reference) continue;
    std::size_t n = 64;
    std::size_t best_n = n;
    double best_gap = 1e300;
    for (int iter = 0; iter < 12; ++iter) {
      FilterConfig probe = a.config;
      probe.particles = n;
      probe.cluster_particles = n;
      double ms = 0.0;
      try {
        ms = detail::measure_step_ms(model, probe, warmup);
      } catch (const InferenceError&) {
        n = std::max<std::size_t>(16, n / 2);  // join blowup or depletion at this size
        continue;
      }
      double gap = std::abs(ms - target_ms) / target_ms;
      if (gap < best_gap) {
        best_gap = gap;
        best_n = n;
      }
      if (gap <= config.time_tolerance) break;
      double ratio = std::pow(target_ms / ms, 0.7);  // damped: costs are superlinear for fp1
      ratio = std::clamp(ratio, 0.3, 6.0);
      std::size_t next = std::max<std::size_t>(16, static_cast<std::size_t>(n * ratio));
      if (next == n) break;
      n = next;
    }
    a.config.particles = best_n;
    a.config.cluster_particles = best_n;
    counts[a.label] = best_n;
  }
  return counts;
}

namespace detail {

struct ResolvedExperiment {
  DbnModel model;
  std::vector<AlgorithmSpec> algorithms;
  std::shared_ptr<const ExactEngine> engine;  // shared by exact/bk/kl paths
};

inline ResolvedExperiment resolve_experiment(const ExperimentConfig& config) {
  ResolvedExperiment r;
  if (config.model_file)
    r.model = load_model(*config.model_file);
  else if (config.generator)
    r.model = build_model(*config.generator);
  else
    throw ValidationError("experiment config names neither a model file nor a generator");
  auto violations = validate_model(r.model);
  if (!violations.empty())
    throw ValidationError("experiment model fails validation: " + violations.front().where +
                          ": " + violations.front().message);
  if (config.trials < 1 || config.steps < 1)
    throw ValidationError("experiment needs trials >= 1 and steps >= 1");
  if (config.algorithms.empty())
    throw ValidationError("experiment lists no algorithms");

  r.algorithms = config.algorithms;
  std::vector<std::string> labels;
  for (AlgorithmSpec& a : r.algorithms) {
    if (a.label.empty()) a.label = algorithm_name(a.config.algorithm);
    while (std::find(labels.begin(), labels.end(), a.label) != labels.end())
      a.label += "+";
    labels.push_back(a.label);
    if (a.clusters_text)
      a.config.clustering = parse_clustering(*a.clusters_text, r.model);
    else if (a.auto_blocks)
      a.config.clustering = block_clustering(r.model, *a.auto_blocks);
  }

  bool need_engine = config.compute_kl;
  for (const AlgorithmSpec& a : r.algorithms)
    if (a.config.algorithm == Algorithm::exact || a.config.algorithm == Algorithm::bk)
      need_engine = true;
  if (need_engine) {
    ExactOptions opt = r.algorithms.front().config.exact;
    r.engine = std::make_shared<ExactEngine>(r.model, opt);  // throws when over the cap
    for (AlgorithmSpec& a : r.algorithms) a.config.shared_engine = r.engine;
  }
  return r;
}

// Runs one algorithm over one trial's observations, appending records.
inline void run_algorithm_trial(const DbnModel& model, const AlgorithmSpec& spec,
                                const Trajectory& traj, std::size_t trial,
                                std::uint64_t experiment_seed, std::size_t alg_index,
                                const std::vector<DenseDistribution>* exact_trace,
                                std::vector<MetricsRecord>& out,
                                std::vector<DenseDistribution>* capture_trace) {
  FilterConfig cfg = spec.config;
  cfg.seed = derive_seed(experiment_seed, trial, alg_index);
  const double eps = cfg.epsilon;
  auto emit = [&](std::size_t t, const char* metric, double value) {
    out.push_back({trial, t, spec.label, metric, value});
  };
  std::vector<VarId> state_vars = model.state_vars();
  auto emit_kl = [&](const Filter& filter, std::size_t t) {
    if (!exact_trace && !capture_trace) return;
    const std::vector<DenseDistribution>& trace =
        exact_trace ? *exact_trace : *capture_trace;
    if (t >= trace.size()) return;
    DenseDistribution joint = filter.belief_joint(eps);
    emit(t, "kl_joint", kl_divergence(trace[t], joint));
    double acc = 0.0;
    for (VarId v : state_vars) {
      std::span<const VarId> one(&v, 1);
      acc += kl_divergence(trace[t].marginal(one), filter.marginal(one, eps));
    }
    emit(t, "kl_marginal_mean", acc / static_cast<double>(state_vars.size()));
  };

  std::size_t at = 0;
  try {
    auto start = std::chrono::steady_clock::now();
    auto filter = Filter::create(cfg, model);
    filter->init(traj.observed[0]);
    emit(0, "wall_ms", ms_since(start));
    if (is_particle_algorithm(cfg.algorithm))
      emit(0, "particle_count", static_cast<double>(cfg.particles));
    if (capture_trace) {
      auto* exact = dynamic_cast<const ExactFilter*>(filter.get());
      if (exact) capture_trace->push_back(exact->posterior());
    }
    emit_kl(*filter, 0);
    for (std::size_t t = 1; t < traj.slices(); ++t) {
      at = t;
      start = std::chrono::steady_clock::now();
      double inc = filter->step(traj.observed[t]);
      emit(t, "wall_ms", ms_since(start));
      emit(t, "nll_increment", -inc);
      if (cfg.algorithm == Algorithm::fp1)
        emit(t, "join_rows", static_cast<double>(filter->last_join_rows()));
      if (cfg.algorithm == Algorithm::fp2)
        emit(t, "discard_rate", filter->last_discard_rate());
      if (capture_trace) {
        auto* exact = dynamic_cast<const ExactFilter*>(filter.get());
        if (exact) capture_trace->push_back(exact->posterior());
      }
      emit_kl(*filter, t);
    }
  } catch (const InferenceError&) {
    // the failing step becomes a failure record; other algorithms continue
    emit(at, "failure", 1.0);
  }
}

}  // namespace detail

/// Runs every configured algorithm over `trials` simulated trajectories of
/// the configured model, emitting one record per (trial, t, algorithm,
/// metric). Failures of one algorithm become failure records and never
/// disturb the other algorithms of the same trial. Trials run in parallel
/// with per-trial derived seeds; the record order is deterministic.
inline std::vector<MetricsRecord> run_experiment(const ExperimentConfig& config) {
  detail::ResolvedExperiment rx = detail::resolve_experiment(config);
  if (config.time_budget) equalize_particle_counts(config, rx.model, rx.algorithms);

  const std::size_t trials = config.trials;
  std::vector<std::vector<MetricsRecord>> per_trial(trials);

  // index of the exact algorithm whose run doubles as the KL reference
  std::size_t exact_index = rx.algorithms.size();
  for (std::size_t i = 0; i < rx.algorithms.size(); ++i)
    if (rx.algorithms[i].config.algorithm == Algorithm::exact) {
      exact_index = i;
      break;
    }

  auto run_trial = [&](std::size_t trial) {
    Rng traj_rng = Rng::derive(config.seed, 0x7472616aULL + trial);
    Trajectory traj = simulate(rx.model, config.steps, traj_rng);
    std::vector<std::vector<MetricsRecord>> per_alg(rx.algorithms.size());
    std::vector<DenseDistribution> trace;

    if (config.compute_kl) {
      if (exact_index < rx.algorithms.size()) {
        detail::run_algorithm_trial(rx.model, rx.algorithms[exact_index], traj, trial,
                                    config.seed, exact_index, nullptr,
                                    per_alg[exact_index], &trace);
      } else {
        for (const ExactStep& s :
             exact_filter(rx.model, traj.observed, rx.algorithms.front().config.exact))
          trace.push_back(s.posterior);
      }
    }
    for (std::size_t i = 0; i < rx.algorithms.size(); ++i) {
      if (config.compute_kl && i == exact_index) continue;  // already run
      detail::run_algorithm_trial(rx.model, rx.algorithms[i], traj, trial, config.seed, i,
                                  config.compute_kl ? &trace : nullptr, per_alg[i],
                                  nullptr);
    }
    std::vector<MetricsRecord>& merged = per_trial[trial];
    for (auto& block : per_alg)
      merged.insert(merged.end(), block.begin(), block.end());
  };

  std::size_t threads = config.threads ? config.threads : std::thread::hardware_concurrency();
  threads = std::max<std::size_t>(1, std::min(threads, trials));
  if (threads == 1) {
    for (std::size_t trial = 0; trial < trials; ++trial) run_trial(trial);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w)
      pool.emplace_back([&] {
        for (;;) {
          std::size_t trial = next.fetch_add(1);
          if (trial >= trials) return;
          run_trial(trial);
        }
      });
    for (std::thread& th : pool) th.join();
  }

  std::vector<MetricsRecord> records;
  for (auto& block : per_trial)
    records.insert(records.end(), block.begin(), block.end());
  return records;
}

// ---------------------------------------------------------------------------
// aggregation

struct MetricStat {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t trials = 0;
};

struct Summary {
  // per algorithm, per metric: stats over per-trial reductions
  // (nll_increment reduces by sum within a trial, everything else by mean)
  std::map<std::string, std::map<std::string, MetricStat>> by_algorithm;
  // per algorithm, per metric, per t: mean over trials
  std::map<std::string, std::map<std::string, std::vector<double>>> series;
  struct TableRow {
    std::string algorithm;
    std::string clusters;
    double neg_log_lik = 0.0;
    double ms_per_iter = 0.0;
  };
  std::vector<TableRow> table;
};

inline Summary summarize(const std::vector<MetricsRecord>& records,
                         const ExperimentConfig* config = nullptr) {
  Summary s;
  // per-trial reduction
  std::map<std::string, std::map<std::string, std::map<std::size_t, std::pair<double, std::size_t>>>>
      acc;  // alg -> metric -> trial -> (sum, count)
  std::map<std::string, std::map<std::string, std::map<std::size_t, std::pair<double, std::size_t>>>>
      step_acc;  // alg -> metric -> t -> (sum, count)
  for (const MetricsRecord& r : records) {
    auto& cell = acc[r.algorithm][r.metric][r.trial];
    cell.first += r.value;
    cell.second += 1;
    auto& sc = step_acc[r.algorithm][r.metric][r.t];
    sc.first += r.value;
    sc.second += 1;
  }
  for (auto& [alg, metrics] : acc) {
    for (auto& [metric, trials] : metrics) {
      std::vector<double> values;
      for (auto& [trial, cell] : trials) {
        double v = metric == "nll_increment" || metric == "failure"
                       ? cell.first
                       : cell.first / static_cast<double>(cell.second);
        values.push_back(v);
      }
      MetricStat st;
      st.trials = values.size();
      for (double v : values) st.mean += v;
      st.mean /= static_cast<double>(values.size());
      if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - st.mean) * (v - st.mean);
        double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
        st.stderr_ = sd / std::sqrt(static_cast<double>(values.size()));
      }
      s.by_algorithm[alg][metric] = st;
    }
  }
  for (auto& [alg, metrics] : step_acc) {
    for (auto& [metric, steps] : metrics) {
      if (metric != "kl_joint" && metric != "kl_marginal_mean" &&
          metric != "nll_increment" && metric != "wall_ms")
        continue;
      std::size_t max_t = 0;
      for (auto& [t, cell] : steps) max_t = std::max(max_t, t);
      std::vector<double> series(max_t + 1, std::numeric_limits<double>::quiet_NaN());
      for (auto& [t, cell] : steps)
        series[t] = cell.first / static_cast<double>(cell.second);
      s.series[alg][metric] = std::move(series);
    }
  }
  // Table-shaped digest: one row per algorithm
  for (auto& [alg, metrics] : s.by_algorithm) {
    Summary::TableRow row;
    row.algorithm = alg;
    row.clusters = "-";
    if (config) {
      for (const AlgorithmSpec& a : config->algorithms) {
        std::string label = a.label.empty() ? algorithm_name(a.config.algorithm) : a.label;
        if (label == alg) {
          std::size_t k = a.config.clustering.size();
          if (a.auto_blocks) k = *a.auto_blocks;
          if (k > 0) row.clusters = std::to_string(k);
        }
      }
    }
    if (auto it = metrics.find("nll_increment"); it != metrics.end())
      row.neg_log_lik = it->second.mean;
    if (auto it = metrics.find("wall_ms"); it != metrics.end())
      row.ms_per_iter = it->second.mean;
    s.table.push_back(std::move(row));
  }
  return s;
}

inline void write_records_csv(const std::vector<MetricsRecord>& records, std::ostream& out) {
  out << "trial,t,algorithm,metric,value\n";
  for (const MetricsRecord& r : records)
    out << r.trial << "," << r.t << "," << r.algorithm << "," << r.metric << ","
        << format_double(r.value) << "\n";
}

inline std::string summary_to_json(const Summary& s) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json algs = nlohmann::ordered_json::object();
  for (const auto& [alg, metrics] : s.by_algorithm) {
    nlohmann::ordered_json m = nlohmann::ordered_json::object();
    for (const auto& [metric, st] : metrics) {
      nlohmann::ordered_json one;
      one["mean"] = st.mean;
      one["stderr"] = st.stderr_;
      one["trials"] = st.trials;
      m[metric] = std::move(one);
    }
    algs[alg] = std::move(m);
  }
  j["algorithms"] = std::move(algs);
  nlohmann::ordered_json series = nlohmann::ordered_json::object();
  for (const auto& [alg, metrics] : s.series) {
    nlohmann::ordered_json m = nlohmann::ordered_json::object();
    for (const auto& [metric, values] : metrics) {
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (double v : values)
        arr.push_back(std::isnan(v) ? nlohmann::ordered_json() : nlohmann::ordered_json(v));
      m[metric] = std::move(arr);
    }
    series[alg] = std::move(m);
  }
  j["series"] = std::move(series);
  nlohmann::ordered_json table = nlohmann::ordered_json::array();
  for (const Summary::TableRow& row : s.table) {
    nlohmann::ordered_json r;
    r["algorithm"] = row.algorithm;
    r["clusters"] = row.clusters;
    r["neg_log_lik"] = row.neg_log_lik;
    r["ms_per_iter"] = row.ms_per_iter;
    table.push_back(std::move(r));
  }
  j["table"] = std::move(table);
  return j.dump(2) + "\n";
}

inline std::string summary_table_text(const Summary& s) {
  std::string out = "algorithm      clusters   -log lik.    time/iter (ms)\n";
  char buf[160];
  for (const Summary::TableRow& row : s.table) {
    std::snprintf(buf, sizeof(buf), "%-14s %-10s %-12.4f %-12.4f\n", row.algorithm.c_str(),
                  row.clusters.c_str(), row.neg_log_lik, row.ms_per_iter);
    out += buf;
  }
  return out;
}

// ---------------------------------------------------------------------------
// experiment config files (JSON)

inline ExperimentConfig experiment_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("experiment config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    const auto& jm = j.at("model");
    if (jm.contains("file")) {
      cfg.model_file = jm.at("file").get<std::string>();
    } else {
      GeneratorSpec g;
      g.topology = jm.at("generator").get<std::string>();
      if (jm.contains("nodes")) g.nodes = jm.at("nodes").get<std::size_t>();
      if (jm.contains("cross_edges")) g.cross_edges = jm.at("cross_edges").get<std::size_t>();
      if (jm.contains("parents")) g.parents = jm.at("parents").get<std::size_t>();
      if (jm.contains("skew")) g.skew = jm.at("skew").get<double>();
      if (jm.contains("seed")) g.seed = jm.at("seed").get<std::uint64_t>();
      cfg.generator = g;
    }
    cfg.steps = j.at("steps").get<std::size_t>();
    cfg.trials = j.at("trials").get<std::size_t>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("time_budget")) cfg.time_budget = j.at("time_budget").get<bool>();
    if (j.contains("time_reference"))
      cfg.time_reference = j.at("time_reference").get<std::string>();
    if (j.contains("compute_kl")) cfg.compute_kl = j.at("compute_kl").get<bool>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<std::size_t>();
    for (const auto& ja : j.at("algorithms")) {
      AlgorithmSpec a;
      std::string name = ja.at("algorithm").get<std::string>();
      auto alg = parse_algorithm(name);
      if (!alg) throw IoError("unknown algorithm '" + name + "'");
      a.config.algorithm = *alg;
      if (ja.contains("label")) a.label = ja.at("label").get<std::string>();
      if (ja.contains("particles")) a.config.particles = ja.at("particles").get<std::size_t>();
      if (ja.contains("cluster_particles"))
        a.config.cluster_particles = ja.at("cluster_particles").get<std::size_t>();
      if (ja.contains("clusters")) a.clusters_text = ja.at("clusters").get<std::string>();
      if (ja.contains("auto_blocks")) a.auto_blocks = ja.at("auto_blocks").get<std::size_t>();
      if (ja.contains("resample")) {
        std::string r = ja.at("resample").get<std::string>();
        if (r == "multinomial")
          a.config.resample = ResampleScheme::multinomial;
        else if (r == "systematic")
          a.config.resample = ResampleScheme::systematic;
        else
          throw IoError("unknown resample scheme '" + r + "'");
      }
      if (ja.contains("epsilon")) a.config.epsilon = ja.at("epsilon").get<double>();
      if (ja.contains("join_cap")) a.config.join_row_cap = ja.at("join_cap").get<std::size_t>();
      if (ja.contains("joint_cap")) a.config.exact.joint_cap = ja.at("joint_cap").get<std::size_t>();
      if (ja.contains("calibrate")) a.calibrate_particles = ja.at("calibrate").get<bool>();
      cfg.algorithms.push_back(std::move(a));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed experiment config: ") + e.what());
  }
  return cfg;
}

inline ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open experiment config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return experiment_from_json(ss.str());
}

}  // namespace dbnmon
