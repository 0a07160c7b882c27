#include <catch2/catch_amalgamated.hpp>

#include "dbnmon/generators.hpp"
#include "dbnmon/sampling.hpp"
#include "support/oracles.hpp"
#include "support/test_models.hpp"

using namespace dbnmon;

TEST_CASE("a deterministic prior yields the unique consistent assignment") {
  DbnModel m = testutil::deterministic_model();
  Rng rng(1);
  Assignment a = sample_slice0(m, rng);
  REQUIRE(a.get(0) == 1);  // state
  REQUIRE(a.get(1) == 1);  // observation copies the state
}

TEST_CASE("binary root frequencies match the prior probability") {
  DbnModel m = testutil::single_var_model(0.7, 0.8, 0.9);
  ModelIndex idx(m);
  Rng rng(11);
  const int n = 100000;
  int ones = 0;
  for (int i = 0; i < n; ++i) ones += sample_slice0(m, idx, rng).get(0);
  // binomial oracle: 3 sigma of 0.7 at n = 100000 is 0.0043
  REQUIRE(std::abs(ones / double(n) - 0.7) < 0.0045);
}

TEST_CASE("independent roots sample as a product of marginals") {
  testutil::ModelBuilder b;
  VarId x = b.add_state("x");
  VarId z = b.add_state("z");
  b.prior(x, {}, {0.4, 0.6});
  b.prior(z, {}, {0.25, 0.75});
  b.transition(x, {testutil::prev(x)}, {1, 0, 0, 1});
  b.transition(z, {testutil::prev(z)}, {1, 0, 0, 1});
  DbnModel m = b.build();
  ModelIndex idx(m);
  Rng rng(5);
  const int n = 100000;
  std::array<int, 4> counts{};
  for (int i = 0; i < n; ++i) {
    Assignment a = sample_slice0(m, idx, rng);
    ++counts[a.get(x) * 2 + a.get(z)];
  }
  const double expected[4] = {0.4 * 0.25, 0.4 * 0.75, 0.6 * 0.25, 0.6 * 0.75};
  for (int c = 0; c < 4; ++c) {
    double p = expected[c];
    double sigma = std::sqrt(p * (1 - p) / n);
    REQUIRE(std::abs(counts[c] / double(n) - p) < 3.5 * sigma);
  }
}

TEST_CASE("identity transitions keep the previous state") {
  testutil::ModelBuilder b;
  VarId x = b.add_state("x", 3);
  b.prior(x, {}, {0.2, 0.3, 0.5});
  b.transition(x, {testutil::prev(x)}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  DbnModel m = b.build();
  Rng rng(2);
  Assignment prev(m.var_count());
  prev.set(x, 2);
  REQUIRE(sample_transition(m, prev, rng).get(x) == 2);
}

TEST_CASE("sticky transition frequencies match the keep probability") {
  DbnModel m = testutil::single_var_model(0.5, 0.8, 0.9);
  ModelIndex idx(m);
  Rng rng(17);
  Assignment prev(m.var_count());
  prev.set(0, 1);
  const int n = 100000;
  int stays = 0;
  for (int i = 0; i < n; ++i) stays += sample_transition(m, idx, prev, rng).get(0) == 1;
  // 3 sigma of Binomial(100000, 0.8) as a frequency is 0.0038
  REQUIRE(std::abs(stays / double(n) - 0.8) < 0.0038);
}

TEST_CASE("a deterministic observation child copies the sampled state") {
  DbnModel m = testutil::single_var_model(0.5, 0.8, 1.0);
  ModelIndex idx(m);
  Rng rng(23);
  Assignment prev(m.var_count());
  prev.set(0, 0);
  for (int i = 0; i < 50; ++i) {
    Assignment a = sample_transition(m, idx, prev, rng);
    REQUIRE(a.get(1) == a.get(0));
  }
}

TEST_CASE("sample_transition rejects an incomplete previous assignment") {
  DbnModel m = testutil::chain2_model();
  Rng rng(1);
  Assignment prev(m.var_count());
  prev.set(0, 1);  // x1 missing
  REQUIRE_THROWS_AS(sample_transition(m, prev, rng), std::invalid_argument);
}

TEST_CASE("simulate covers the base case, determinism and reproducibility") {
  SECTION("zero steps give a single slice") {
    DbnModel m = testutil::chain2_model();
    Rng rng(3);
    Trajectory t = simulate(m, 0, rng);
    REQUIRE(t.slices() == 1);
    REQUIRE(t.hidden.size() == 1);
  }
  SECTION("a deterministic model walks its unique trajectory") {
    DbnModel m = testutil::deterministic_model();
    Rng rng(3);
    Trajectory t = simulate(m, 5, rng);
    // prior starts at 1, the transition cycles 0 -> 1 -> 2 -> 0
    Value expected = 1;
    for (std::size_t s = 0; s < t.slices(); ++s) {
      REQUIRE(t.hidden[s].get(0) == expected);
      REQUIRE(t.observed[s].get(1) == expected);
      expected = static_cast<Value>((expected + 1) % 3);
    }
  }
  SECTION("the same seed reproduces the trajectory") {
    DbnModel m = testutil::chain2_model();
    Rng r1(99), r2(99);
    REQUIRE(simulate(m, 20, r1) == simulate(m, 20, r2));
  }
}

TEST_CASE("ancestral sampling matches exact enumeration of the prior") {
  Rng gen = Rng::derive(1234, 0);
  DbnModel m = generate_random_parent_model(4, 2, 0.3, gen);
  ModelIndex idx(m);
  oracle::StateSpace ss(m);
  std::vector<double> expected = oracle::direct_prior_table(m);
  double total = 0.0;
  for (double p : expected) total += p;
  for (double& p : expected) p /= total;

  Rng rng(77);
  const int n = 200000;
  std::vector<double> counts(ss.size, 0.0);
  std::vector<Value> full(m.var_count(), 0);
  for (int i = 0; i < n; ++i) {
    Assignment a = sample_slice0(m, idx, rng);
    std::size_t index = 0;
    for (std::size_t v = 0; v < ss.vars.size(); ++v)
      index = index * static_cast<std::size_t>(ss.cards[v]) +
              static_cast<std::size_t>(a.get(ss.vars[v]));
    counts[index] += 1.0 / n;
  }
  REQUIRE(oracle::tv_distance(counts, expected) < 0.01);
}
