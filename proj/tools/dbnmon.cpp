// dbnmon command line: model generation, forward simulation, filtering, and
// the benchmark harness. Exit codes: 0 ok, 2 validation error, 3 inference
// failure, 4 i/o error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dbnmon/dbnmon.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitInference = 3;
constexpr int kExitIo = 4;

struct GenArgs {
  std::string topology;
  std::size_t nodes = 0;  // 0 = topology default
  std::size_t cross = 2;
  std::size_t parents = 3;
  double skew = 0.1;
  std::uint64_t seed = 0;
  std::string out;
};

int run_gen(const GenArgs& args) {
  dbnmon::GeneratorSpec spec;
  spec.topology = args.topology;
  spec.nodes = args.nodes ? args.nodes : (args.topology == "two-cluster" ? 5 : 50);
  spec.cross_edges = args.cross;
  spec.parents = args.parents;
  spec.skew = args.skew;
  spec.seed = args.seed;
  dbnmon::DbnModel model = dbnmon::build_model(spec);
  dbnmon::save_model(model, args.out);
  std::cout << "wrote " << args.out << " (" << model.state_vars().size()
            << " state variables)\n";
  return kExitOk;
}

struct SimArgs {
  std::string model;
  std::size_t steps = 10;
  std::uint64_t seed = 0;
  std::string out;
  bool obs_only = false;
};

int run_simulate(const SimArgs& args) {
  dbnmon::DbnModel model = dbnmon::load_model(args.model);
  dbnmon::Rng rng = dbnmon::Rng::derive(args.seed, 0x73696dULL);
  dbnmon::Trajectory traj = dbnmon::simulate(model, args.steps, rng);
  if (args.obs_only)
    dbnmon::save_observations(traj, model, args.out);
  else
    dbnmon::save_trajectory(traj, model, args.out);
  std::cout << "wrote " << args.out << " (" << traj.slices() << " slices)\n";
  return kExitOk;
}

struct FilterArgs {
  std::string model;
  std::string obs;
  std::string algorithm = "exact";
  std::size_t particles = 1000;
  std::size_t cluster_particles = 0;  // 0 = same as particles
  std::string clusters;
  std::string clusters_file;
  std::string resample = "systematic";
  double epsilon = 1e-6;
  std::uint64_t seed = 0;
  std::size_t joint_cap = std::size_t(1) << 20;
  std::size_t join_cap = 1000000;
  std::string out;
  std::string dump_particles;
  bool verbose = false;
};

void dump_filter_particles(const dbnmon::Filter& filter, const dbnmon::DbnModel& model,
                           const std::string& path) {
  auto write = [&](const dbnmon::ParticleTable& table, const std::string& p) {
    std::ofstream os(p);
    if (!os) throw dbnmon::IoError("cannot open '" + p + "' for writing");
    dbnmon::write_particle_csv(table, model, os);
  };
  if (auto* pf = dynamic_cast<const dbnmon::PfFilter*>(&filter)) {
    write(pf->particles(), path);
    return;
  }
  if (auto* fp = dynamic_cast<const dbnmon::FpFilterBase*>(&filter)) {
    for (std::size_t c = 0; c < fp->cluster_tables().size(); ++c)
      write(fp->cluster_tables()[c], path + ".c" + std::to_string(c) + ".csv");
    return;
  }
  std::cerr << "note: --dump-particles applies to particle algorithms only\n";
}

int run_filter(const FilterArgs& args) {
  dbnmon::DbnModel model = dbnmon::load_model(args.model);
  dbnmon::Trajectory traj = dbnmon::load_trajectory(model, args.obs);

  dbnmon::FilterConfig config;
  auto alg = dbnmon::parse_algorithm(args.algorithm);
  if (!alg) throw dbnmon::ValidationError("unknown algorithm '" + args.algorithm + "'");
  config.algorithm = *alg;
  config.particles = args.particles;
  if (args.cluster_particles) config.cluster_particles = args.cluster_particles;
  config.epsilon = args.epsilon;
  config.seed = args.seed;
  config.exact.joint_cap = args.joint_cap;
  config.join_row_cap = args.join_cap;
  if (args.resample == "multinomial")
    config.resample = dbnmon::ResampleScheme::multinomial;
  else if (args.resample == "systematic")
    config.resample = dbnmon::ResampleScheme::systematic;
  else
    throw dbnmon::ValidationError("unknown resample scheme '" + args.resample + "'");
  if (!args.clusters.empty())
    config.clustering = dbnmon::parse_clustering(args.clusters, model);
  else if (!args.clusters_file.empty())
    config.clustering = dbnmon::load_clustering(model, args.clusters_file);

  auto filter = dbnmon::Filter::create(config, model);
  if (args.verbose) {
    if (auto* fp3 = dynamic_cast<const dbnmon::Fp3Filter*>(filter.get())) {
      const dbnmon::CliqueTree& tree = fp3->clique_tree();
      std::cerr << "clique tree: " << tree.cliques.size() << " cliques\n";
      for (std::size_t c = 0; c < tree.cliques.size(); ++c) {
        std::cerr << "  clique " << c << ":";
        for (dbnmon::VarId v : tree.cliques[c]) {
          if (v < tree.base_vars)
            std::cerr << " " << model.name(v);
          else
            std::cerr << " " << model.name(v - static_cast<dbnmon::VarId>(tree.base_vars))
                      << "@prev";
        }
        std::cerr << "\n";
      }
    }
  }

  std::ofstream out(args.out);
  if (!out) throw dbnmon::IoError("cannot open '" + args.out + "' for writing");
  out << "t,variable,value,probability\n";
  std::vector<dbnmon::VarId> states = model.state_vars();
  auto emit_marginals = [&](std::size_t t) {
    for (dbnmon::VarId v : states) {
      std::span<const dbnmon::VarId> one(&v, 1);
      dbnmon::DenseDistribution m = filter->marginal(one, args.epsilon);
      for (std::size_t val = 0; val < m.probs.size(); ++val)
        out << t << "," << model.name(v) << "," << val << ","
            << dbnmon::format_double(m.probs[val]) << "\n";
    }
  };

  filter->init(traj.observed[0]);
  emit_marginals(0);
  for (std::size_t t = 1; t < traj.slices(); ++t) {
    filter->step(traj.observed[t]);
    emit_marginals(t);
    if (args.verbose && filter->last_join_rows())
      std::cerr << "t=" << t << " join_rows=" << filter->last_join_rows() << "\n";
  }
  if (!args.dump_particles.empty()) dump_filter_particles(*filter, model, args.dump_particles);
  std::cout << "log_likelihood_total=" << dbnmon::format_double(filter->total_log_likelihood())
            << "\n";
  std::cout << "wrote " << args.out << "\n";
  return kExitOk;
}

struct BenchArgs {
  std::string config;
  std::string out;
  std::string summary;
  std::size_t threads = 0;
};

int run_bench(const BenchArgs& args) {
  dbnmon::ExperimentConfig config = dbnmon::load_experiment(args.config);
  if (args.threads) config.threads = args.threads;
  std::vector<dbnmon::MetricsRecord> records = dbnmon::run_experiment(config);
  std::ofstream out(args.out);
  if (!out) throw dbnmon::IoError("cannot open '" + args.out + "' for writing");
  dbnmon::write_records_csv(records, out);
  dbnmon::Summary summary = dbnmon::summarize(records, &config);
  if (!args.summary.empty()) {
    std::ofstream sout(args.summary);
    if (!sout) throw dbnmon::IoError("cannot open '" + args.summary + "' for writing");
    sout << dbnmon::summary_to_json(summary);
  }
  std::cout << dbnmon::summary_table_text(summary);
  std::cout << "wrote " << args.out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete DBN monitoring: exact, particle, Boyen-Koller and "
               "factored-particle filtering"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* cmd_gen = app.add_subcommand("gen", "generate a random benchmark model");
  cmd_gen->add_option("--topology", gen.topology, "two-cluster | random-parents")
      ->required()
      ->check(CLI::IsMember({"two-cluster", "random-parents"}));
  cmd_gen->add_option("--nodes", gen.nodes,
                      "nodes per cluster (two-cluster) or total nodes (random-parents)");
  cmd_gen->add_option("--cross", gen.cross, "cross-cluster edges (two-cluster)");
  cmd_gen->add_option("--parents", gen.parents, "parents per node (random-parents)");
  cmd_gen->add_option("--skew", gen.skew, "CPT skew in (0, 0.5) (random-parents)");
  cmd_gen->add_option("--seed", gen.seed, "generator seed")->required();
  cmd_gen->add_option("--out", gen.out, "output model file")->required();

  SimArgs sim;
  CLI::App* cmd_sim = app.add_subcommand("simulate", "sample a trajectory from a model");
  cmd_sim->add_option("--model", sim.model, "model file")->required();
  cmd_sim->add_option("--steps", sim.steps, "number of transitions")->required();
  cmd_sim->add_option("--seed", sim.seed, "simulation seed")->required();
  cmd_sim->add_option("--out", sim.out, "output trajectory csv")->required();
  cmd_sim->add_flag("--obs-only", sim.obs_only, "write only the observed section");

  FilterArgs flt;
  CLI::App* cmd_flt = app.add_subcommand("filter", "run one monitoring algorithm");
  cmd_flt->add_option("--model", flt.model, "model file")->required();
  cmd_flt->add_option("--obs", flt.obs, "trajectory csv (observed section is used)")->required();
  cmd_flt->add_option("--algorithm", flt.algorithm, "exact|pf|bk|fp1|fp2|fp3")
      ->required()
      ->check(CLI::IsMember({"exact", "pf", "bk", "fp1", "fp2", "fp3"}));
  cmd_flt->add_option("--particles", flt.particles, "particle count N");
  cmd_flt->add_option("--cluster-particles", flt.cluster_particles, "per-cluster count N_c");
  cmd_flt->add_option("--clusters", flt.clusters, "clustering, e.g. \"a0,a1;a2,b0\"");
  cmd_flt->add_option("--clusters-file", flt.clusters_file, "file holding a clustering");
  cmd_flt->add_option("--resample", flt.resample, "multinomial | systematic");
  cmd_flt->add_option("--epsilon", flt.epsilon, "belief smoothing (relative)");
  cmd_flt->add_option("--seed", flt.seed, "filter seed")->required();
  cmd_flt->add_option("--joint-cap", flt.joint_cap, "exact enumeration cap");
  cmd_flt->add_option("--join-cap", flt.join_cap, "fp1 equijoin row cap");
  cmd_flt->add_option("--out", flt.out, "per-step marginals csv")->required();
  cmd_flt->add_option("--dump-particles", flt.dump_particles,
                      "write the final particle table(s) as csv");
  cmd_flt->add_flag("--verbose", flt.verbose, "print clique structure and join sizes");

  BenchArgs bench;
  CLI::App* cmd_bench = app.add_subcommand("bench", "run a benchmark experiment");
  cmd_bench->add_option("--config", bench.config, "experiment json")->required();
  cmd_bench->add_option("--out", bench.out, "metrics csv")->required();
  cmd_bench->add_option("--summary", bench.summary, "summary json");
  cmd_bench->add_option("--threads", bench.threads, "worker threads (0 = auto)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*cmd_gen) return run_gen(gen);
    if (*cmd_sim) return run_simulate(sim);
    if (*cmd_flt) return run_filter(flt);
    if (*cmd_bench) return run_bench(bench);
  } catch (const dbnmon::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const dbnmon::InferenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInference;
  } catch (const dbnmon::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
