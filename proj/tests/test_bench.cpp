#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "dbnmon/bench.hpp"
#include "support/stats.hpp"
#include "support/test_models.hpp"

using namespace dbnmon;

namespace {

ExperimentConfig small_experiment() {
  ExperimentConfig cfg;
  GeneratorSpec gen;
  gen.topology = "two-cluster";
  gen.nodes = 2;
  gen.cross_edges = 1;
  gen.seed = 5;
  cfg.generator = gen;
  cfg.steps = 4;
  cfg.trials = 3;
  cfg.seed = 99;
  cfg.threads = 1;
  return cfg;
}

std::string csv_without_timing(const std::vector<MetricsRecord>& records) {
  std::ostringstream os;
  write_records_csv(records, os);
  std::istringstream is(os.str());
  std::string line, out;
  while (std::getline(is, line))
    if (line.find(",wall_ms,") == std::string::npos) out += line + "\n";
  return out;
}

}  // namespace

TEST_CASE("kl divergence basics") {
  DenseDistribution p({0}, {2}), q({0}, {2});
  p.probs = {0.3, 0.7};
  REQUIRE(kl_divergence(p, p) == 0.0);

  p.probs = {1.0, 0.0};
  q.probs = {0.5, 0.5};
  REQUIRE(kl_divergence(p, q) == Catch::Approx(std::log(2.0)).margin(1e-12));

  DenseDistribution r({1}, {2});
  r.probs = {0.5, 0.5};
  REQUIRE_THROWS_AS(kl_divergence(p, r), std::invalid_argument);

  q.probs = {0.0, 1.0};
  REQUIRE_THROWS_AS(kl_divergence(p, q), std::domain_error);
}

TEST_CASE("kl is nonnegative across random distribution pairs") {
  Rng rng(17);
  for (int rep = 0; rep < 1000; ++rep) {
    DenseDistribution p({0}, {4}), q({0}, {4});
    p.probs.assign(4, 0.0);
    q.probs.assign(4, 0.0);
    for (int i = 0; i < 4; ++i) {
      p.probs[i] = rng.next_double() + 1e-6;
      q.probs[i] = rng.next_double() + 1e-6;
    }
    p.normalize();
    q.normalize();
    REQUIRE(kl_divergence(p, q) >= -1e-12);
  }
}

TEST_CASE("belief_to_joint matches its per-algorithm definitions") {
  Rng gen(5);
  DbnModel m = generate_two_cluster_model(1, 0, gen);  // decoupled pair
  Rng rng(6);
  Trajectory traj = simulate(m, 3, rng);

  FilterConfig exact_cfg;
  exact_cfg.algorithm = Algorithm::exact;
  auto exact = Filter::create(exact_cfg, m);
  exact->init(traj.observed[0]);

  FilterConfig bk_cfg;
  bk_cfg.algorithm = Algorithm::bk;
  bk_cfg.clustering = block_clustering(m, 2);
  auto bk = Filter::create(bk_cfg, m);
  bk->init(traj.observed[0]);

  for (std::size_t t = 1; t < traj.slices(); ++t) {
    exact->step(traj.observed[t]);
    bk->step(traj.observed[t]);
  }
  DenseDistribution je = belief_to_joint(*exact, 0.0);
  DenseDistribution jb = belief_to_joint(*bk, 0.0);
  for (std::size_t i = 0; i < je.probs.size(); ++i)
    REQUIRE(jb.probs[i] == Catch::Approx(je.probs[i]).margin(1e-9));

  FilterConfig fp_cfg;
  fp_cfg.algorithm = Algorithm::fp1;
  fp_cfg.seed = 3;
  fp_cfg.particles = 500;
  fp_cfg.clustering = single_cluster(m);
  auto fp = Filter::create(fp_cfg, m);
  fp->init(traj.observed[0]);
  const auto& table = dynamic_cast<const FpFilterBase&>(*fp).cluster_tables()[0];
  DenseDistribution direct = to_dense(table, m.cards(), 1e-6 * table.total_weight());
  DenseDistribution via = belief_to_joint(*fp, 1e-6);
  for (std::size_t i = 0; i < via.probs.size(); ++i)
    REQUIRE(via.probs[i] == Catch::Approx(direct.probs[i]).margin(1e-12));
}

TEST_CASE("a single exact trial emits the expected record counts") {
  ExperimentConfig cfg = small_experiment();
  cfg.trials = 1;
  cfg.steps = 3;
  AlgorithmSpec spec;
  spec.config.algorithm = Algorithm::exact;
  cfg.algorithms = {spec};
  auto records = run_experiment(cfg);
  std::size_t nll = 0, wall = 0;
  for (const MetricsRecord& r : records) {
    if (r.metric == "nll_increment") ++nll;
    if (r.metric == "wall_ms") ++wall;
  }
  REQUIRE(nll == 3);
  REQUIRE(wall == 4);  // init plus three steps
}

TEST_CASE("identical configs reproduce identical non-timing records") {
  ExperimentConfig cfg = small_experiment();
  cfg.compute_kl = true;
  AlgorithmSpec exact_spec, pf_spec, fp2_spec;
  exact_spec.config.algorithm = Algorithm::exact;
  pf_spec.config.algorithm = Algorithm::pf;
  pf_spec.config.particles = 300;
  fp2_spec.config.algorithm = Algorithm::fp2;
  fp2_spec.config.particles = 300;
  fp2_spec.auto_blocks = 2;
  cfg.algorithms = {exact_spec, pf_spec, fp2_spec};
  auto r1 = run_experiment(cfg);
  auto r2 = run_experiment(cfg);
  REQUIRE(csv_without_timing(r1) == csv_without_timing(r2));
}

TEST_CASE("thread count does not change the records") {
  ExperimentConfig cfg = small_experiment();
  AlgorithmSpec pf_spec;
  pf_spec.config.algorithm = Algorithm::pf;
  pf_spec.config.particles = 200;
  cfg.algorithms = {pf_spec};
  cfg.threads = 1;
  auto serial = run_experiment(cfg);
  cfg.threads = 3;
  auto parallel = run_experiment(cfg);
  REQUIRE(csv_without_timing(serial) == csv_without_timing(parallel));
}

TEST_CASE("pf total likelihood agrees with exact across trials") {
  ExperimentConfig cfg = small_experiment();
  cfg.trials = 50;
  cfg.steps = 5;
  AlgorithmSpec exact_spec, pf_spec;
  exact_spec.config.algorithm = Algorithm::exact;
  pf_spec.config.algorithm = Algorithm::pf;
  pf_spec.config.particles = 800;
  cfg.algorithms = {exact_spec, pf_spec};
  auto records = run_experiment(cfg);

  std::vector<double> exact_nll(cfg.trials, 0.0), pf_nll(cfg.trials, 0.0);
  for (const MetricsRecord& r : records) {
    if (r.metric != "nll_increment") continue;
    (r.algorithm == "exact" ? exact_nll : pf_nll)[r.trial] += r.value;
  }
  std::vector<double> diffs;
  for (std::size_t i = 0; i < cfg.trials; ++i) diffs.push_back(pf_nll[i] - exact_nll[i]);
  // the pf estimate is consistent; its mean deviation stays within 3 sigma
  REQUIRE(std::abs(teststats::mean(diffs)) <=
          3.0 * teststats::standard_error(diffs) + 1e-9);
}

TEST_CASE("summarize reduces per trial and reports stderr") {
  std::vector<MetricsRecord> records;
  records.push_back({0, 1, "pf", "kl_joint", 1.0});
  Summary single = summarize(records);
  REQUIRE(single.by_algorithm["pf"]["kl_joint"].mean == 1.0);
  REQUIRE(single.by_algorithm["pf"]["kl_joint"].stderr_ == 0.0);

  records.clear();
  records.push_back({0, 1, "pf", "nll_increment", 0.5});
  records.push_back({0, 2, "pf", "nll_increment", 0.5});
  records.push_back({1, 1, "pf", "nll_increment", 1.5});
  records.push_back({1, 2, "pf", "nll_increment", 1.5});
  Summary s = summarize(records);
  // per-trial sums are 1 and 3: mean 2, stderr 1
  REQUIRE(s.by_algorithm["pf"]["nll_increment"].mean == Catch::Approx(2.0));
  REQUIRE(s.by_algorithm["pf"]["nll_increment"].stderr_ == Catch::Approx(1.0));
  REQUIRE(s.series["pf"]["nll_increment"].size() == 3);
  REQUIRE(s.series["pf"]["nll_increment"][1] == Catch::Approx(1.0));
}

TEST_CASE("summary renders a table with algorithm and cluster columns") {
  ExperimentConfig cfg = small_experiment();
  AlgorithmSpec pf_spec, fp2_spec;
  pf_spec.config.algorithm = Algorithm::pf;
  pf_spec.config.particles = 100;
  fp2_spec.config.algorithm = Algorithm::fp2;
  fp2_spec.config.particles = 100;
  fp2_spec.auto_blocks = 2;
  cfg.algorithms = {pf_spec, fp2_spec};
  auto records = run_experiment(cfg);
  Summary s = summarize(records, &cfg);
  std::string text = summary_table_text(s);
  REQUIRE(text.find("-log lik.") != std::string::npos);
  REQUIRE(text.find("fp2") != std::string::npos);
  bool fp2_clusters = false;
  for (const auto& row : s.table)
    if (row.algorithm == "fp2" && row.clusters == "2") fp2_clusters = true;
  REQUIRE(fp2_clusters);
}

TEST_CASE("one algorithm's failure never perturbs the others") {
  ExperimentConfig cfg = small_experiment();
  AlgorithmSpec exact_spec, pf_spec, fp1_spec;
  exact_spec.config.algorithm = Algorithm::exact;
  pf_spec.config.algorithm = Algorithm::pf;
  pf_spec.config.particles = 150;
  fp1_spec.config.algorithm = Algorithm::fp1;
  fp1_spec.config.particles = 200;
  fp1_spec.config.join_row_cap = 10;  // guaranteed blowup
  fp1_spec.auto_blocks = 2;
  cfg.algorithms = {exact_spec, pf_spec, fp1_spec};
  auto with_failure = run_experiment(cfg);

  bool saw_failure = false;
  for (const MetricsRecord& r : with_failure)
    if (r.algorithm == "fp1" && r.metric == "failure") saw_failure = true;
  REQUIRE(saw_failure);

  cfg.algorithms = {exact_spec, pf_spec};
  auto without = run_experiment(cfg);
  auto strip = [](const std::vector<MetricsRecord>& records) {
    std::vector<MetricsRecord> kept;
    for (const MetricsRecord& r : records)
      if (r.algorithm != "fp1" && r.metric != "wall_ms") kept.push_back(r);
    return kept;
  };
  std::ostringstream a, b;
  write_records_csv(strip(with_failure), a);
  write_records_csv(strip(without), b);
  REQUIRE(a.str() == b.str());
}

TEST_CASE("nll additivity: summarized totals equal the sum of increments") {
  ExperimentConfig cfg = small_experiment();
  cfg.trials = 2;
  AlgorithmSpec exact_spec;
  exact_spec.config.algorithm = Algorithm::exact;
  cfg.algorithms = {exact_spec};
  auto records = run_experiment(cfg);
  double manual = 0.0;
  std::size_t trials = 0;
  for (const MetricsRecord& r : records)
    if (r.metric == "nll_increment") {
      manual += r.value;
      trials = std::max(trials, r.trial + 1);
    }
  Summary s = summarize(records);
  REQUIRE(s.by_algorithm["exact"]["nll_increment"].mean * double(trials) ==
          Catch::Approx(manual).epsilon(1e-12));
}

TEST_CASE("experiment json round-trips the interesting fields") {
  std::string text = R"({
    "model": {"generator": "random-parents", "nodes": 12, "parents": 3, "skew": 0.1, "seed": 4},
    "steps": 6, "trials": 2, "seed": 11,
    "time_budget": true, "time_reference": "pf", "compute_kl": false,
    "algorithms": [
      {"algorithm": "pf", "particles": 500},
      {"algorithm": "fp2", "particles": 400, "auto_blocks": 3, "resample": "multinomial",
       "label": "fp2-3", "calibrate": true, "epsilon": 1e-5}
    ]
  })";
  ExperimentConfig cfg = experiment_from_json(text);
  REQUIRE(cfg.generator->topology == "random-parents");
  REQUIRE(cfg.generator->nodes == 12);
  REQUIRE(cfg.steps == 6);
  REQUIRE(cfg.time_budget);
  REQUIRE(cfg.time_reference == "pf");
  REQUIRE(cfg.algorithms.size() == 2);
  REQUIRE(cfg.algorithms[1].label == "fp2-3");
  REQUIRE(cfg.algorithms[1].auto_blocks == 3);
  REQUIRE(cfg.algorithms[1].config.resample == ResampleScheme::multinomial);
  REQUIRE_THROWS_AS(experiment_from_json("{"), IoError);
}

TEST_CASE("time-budget mode calibrates particle algorithms toward the reference") {
  ExperimentConfig cfg = small_experiment();
  cfg.steps = 3;
  cfg.trials = 1;
  cfg.time_budget = true;
  AlgorithmSpec exact_spec, pf_spec;
  exact_spec.config.algorithm = Algorithm::exact;
  pf_spec.config.algorithm = Algorithm::pf;
  pf_spec.config.particles = 123456;  // will be recalibrated downward
  cfg.algorithms = {exact_spec, pf_spec};
  auto records = run_experiment(cfg);
  double count = 0;
  for (const MetricsRecord& r : records)
    if (r.algorithm == "pf" && r.metric == "particle_count") count = r.value;
  REQUIRE(count > 0);
  REQUIRE(count < 123456);  // timing-dependent, but far below the configured N
}
