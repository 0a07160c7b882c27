#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "dbnmon/sample_join.hpp"
#include "support/oracles.hpp"
#include "support/test_models.hpp"

using namespace dbnmon;

namespace {

// the two overlapping cluster tables used throughout: ABC and ACE with value
// index k standing for the k-th symbol (a0..a3, b0..b2, c0..c3, e0..e4)
constexpr VarId A = 0, B = 1, C = 2, E = 3;
const std::vector<int> kCards{4, 3, 4, 5};

ParticleTable abc_table() {
  ParticleTable t({A, B, C});
  for (auto row : {std::array<Value, 3>{0, 1, 0}, {0, 2, 0}, {1, 1, 2},
                   {1, 0, 3}, {2, 1, 3}, {3, 2, 1}})
    t.push_row(std::span<const Value>(row.data(), 3));
  return t;
}

ParticleTable ace_table() {
  ParticleTable t({A, C, E});
  for (auto row : {std::array<Value, 3>{0, 0, 0}, {1, 1, 0}, {2, 3, 2},
                   {2, 3, 4}, {3, 3, 1}, {3, 1, 2}})
    t.push_row(std::span<const Value>(row.data(), 3));
  return t;
}

std::vector<ParticleTable> abc_ace() { return {abc_table(), ace_table()}; }

}  // namespace

TEST_CASE("preprocessing reproduces the worked pruned tables and weights") {
  std::vector<ParticleTable> tables = abc_ace();
  JoinPlan plan = preprocess_sample_join(tables);
  REQUIRE(plan.clusters.size() == 2);

  const ParticleTable& abc = plan.clusters[0].pruned;
  REQUIRE(abc.rows() == 4);
  std::vector<std::vector<Value>> abc_rows;
  for (std::size_t i = 0; i < abc.rows(); ++i)
    abc_rows.emplace_back(abc.row(i).begin(), abc.row(i).end());
  REQUIRE(abc_rows == std::vector<std::vector<Value>>{
                          {0, 1, 0}, {0, 2, 0}, {2, 1, 3}, {3, 2, 1}});
  for (std::size_t i = 0; i < 4; ++i) REQUIRE(abc.weight(i) == Catch::Approx(1.0));

  const ParticleTable& ace = plan.clusters[1].pruned;
  REQUIRE(ace.rows() == 4);
  std::vector<std::vector<Value>> ace_rows;
  for (std::size_t i = 0; i < ace.rows(); ++i)
    ace_rows.emplace_back(ace.row(i).begin(), ace.row(i).end());
  REQUIRE(ace_rows == std::vector<std::vector<Value>>{
                          {0, 0, 0}, {2, 3, 2}, {2, 3, 4}, {3, 1, 2}});
  REQUIRE(ace.weight(0) == Catch::Approx(0.25));
  REQUIRE(ace.weight(1) == Catch::Approx(0.5));
  REQUIRE(ace.weight(2) == Catch::Approx(0.5));
  REQUIRE(ace.weight(3) == Catch::Approx(0.25));
}

TEST_CASE("disjoint clusters need no pruning and carry unit weights") {
  Rng rng(3);
  std::vector<int> cards{2, 3, 2};
  ParticleTable r = testutil::random_table({0, 1}, cards, 9, rng);
  ParticleTable s = testutil::random_table({2}, cards, 7, rng);
  std::vector<ParticleTable> tables{r, s};
  JoinPlan plan = preprocess_sample_join(tables);
  REQUIRE(plan.clusters[0].pruned.rows() == 9);
  REQUIRE(plan.clusters[1].pruned.rows() == 7);
  for (const JoinPlanCluster& c : plan.clusters)
    for (std::size_t i = 0; i < c.pruned.rows(); ++i)
      REQUIRE(c.pruned.weight(i) == Catch::Approx(1.0));
}

TEST_CASE("identical single-column tables weight each binding by 1/|table|") {
  ParticleTable t({0});
  for (Value v : {0, 1, 2}) {
    std::vector<Value> row{v};
    t.push_row(row);
  }
  std::vector<ParticleTable> tables{t, t};
  JoinPlan plan = preprocess_sample_join(tables);
  for (std::size_t i = 0; i < 3; ++i)
    REQUIRE(plan.clusters[1].pruned.weight(i) == Catch::Approx(1.0 / 3.0));
}

TEST_CASE("pruning runs to a fixpoint across three clusters") {
  // x constrains y, y constrains z, and the z table invalidates a y row that
  // a single forward pass over (x,y) would keep
  ParticleTable xy({0, 1});
  for (auto row : {std::array<Value, 2>{0, 0}, {1, 1}})
    xy.push_row(std::span<const Value>(row.data(), 2));
  ParticleTable yz({1, 2});
  for (auto row : {std::array<Value, 2>{0, 0}, {1, 0}, {2, 1}})
    yz.push_row(std::span<const Value>(row.data(), 2));
  ParticleTable zx({2, 0});
  for (auto row : {std::array<Value, 2>{0, 0}})
    zx.push_row(std::span<const Value>(row.data(), 2));
  std::vector<ParticleTable> tables{xy, yz, zx};
  JoinPlan plan = preprocess_sample_join(tables);
  // only x=0,y=0,z=0 survives everywhere
  REQUIRE(plan.clusters[0].pruned.rows() == 1);
  REQUIRE(plan.clusters[1].pruned.rows() == 1);
  REQUIRE(plan.clusters[2].pruned.rows() == 1);
}

TEST_CASE("an unsatisfiable pair of clusters is an empty join") {
  ParticleTable r({0, 1});
  std::vector<Value> r0{0, 0};
  r.push_row(r0);
  ParticleTable s({1, 2});
  std::vector<Value> s0{1, 0};
  s.push_row(s0);
  std::vector<ParticleTable> tables{r, s};
  REQUIRE_THROWS_AS(preprocess_sample_join(tables), EmptyJoinError);
}

TEST_CASE("weighted inputs are rejected") {
  ParticleTable r({0});
  std::vector<Value> row{0};
  r.push_row(row, 0.5);
  std::vector<ParticleTable> tables{r};
  REQUIRE_THROWS_AS(preprocess_sample_join(tables), std::invalid_argument);
}

TEST_CASE("sampled particles come from the true equijoin with the stated weights") {
  std::vector<ParticleTable> tables = abc_ace();
  JoinPlan plan = preprocess_sample_join(tables);
  ParticleTable truth = oracle::brute_equijoin(tables);
  std::map<std::vector<Value>, double> expected_weight;
  // the sample weight of a joined row is the product of the per-cluster
  // compensation fractions; recover it from the preprocessed tables
  for (std::size_t i = 0; i < truth.rows(); ++i) {
    std::vector<Value> key(truth.row(i).begin(), truth.row(i).end());
    // ABC contributes weight 1; ACE contributes its per-row weight
    double w = 0.0;
    const ParticleTable& ace = plan.clusters[1].pruned;
    for (std::size_t j = 0; j < ace.rows(); ++j) {
      auto r = ace.row(j);
      std::size_t pa = *truth.find(A), pc = *truth.find(C), pe = *truth.find(E);
      if (r[0] == key[pa] && r[1] == key[pc] && r[2] == key[pe]) w = ace.weight(j);
    }
    std::vector<Value> canon{key[*truth.find(A)], key[*truth.find(B)],
                             key[*truth.find(C)], key[*truth.find(E)]};
    expected_weight[canon] = w;
  }
  REQUIRE(expected_weight.size() == 5);
  REQUIRE(expected_weight[{0, 1, 0, 0}] == Catch::Approx(0.25));  // the worked 1 x 1/4

  Rng rng(11);
  SampleJoinStats stats;
  ParticleTable sampled = sample_join(plan, 2000, rng, &stats);
  REQUIRE(sampled.rows() == 2000);
  for (std::size_t i = 0; i < sampled.rows(); ++i) {
    std::vector<Value> canon{sampled.row(i)[*sampled.find(A)], sampled.row(i)[*sampled.find(B)],
                             sampled.row(i)[*sampled.find(C)], sampled.row(i)[*sampled.find(E)]};
    auto it = expected_weight.find(canon);
    REQUIRE(it != expected_weight.end());
    REQUIRE(sampled.weight(i) == Catch::Approx(it->second));
    REQUIRE(sampled.weight(i) > 0.0);
    REQUIRE(sampled.weight(i) <= 1.0);
  }
}

TEST_CASE("a single-cluster plan is a uniform bootstrap with unit weights") {
  std::vector<ParticleTable> tables{abc_table()};
  JoinPlan plan = preprocess_sample_join(tables);
  Rng rng(7);
  ParticleTable out = sample_join(plan, 500, rng);
  REQUIRE(out.rows() == 500);
  for (std::size_t i = 0; i < out.rows(); ++i) REQUIRE(out.weight(i) == Catch::Approx(1.0));
}

TEST_CASE("the normalized sampled measure converges to the equijoin distribution") {
  std::vector<ParticleTable> tables = abc_ace();
  JoinPlan plan = preprocess_sample_join(tables);
  ParticleTable truth = oracle::brute_equijoin(tables);
  DenseDistribution expected = to_dense(truth, kCards, 0.0);

  Rng rng(2025);
  ParticleTable sampled = sample_join(plan, 200000, rng);
  // reorder onto the truth schema before densifying
  std::vector<VarId> order = truth.schema();
  DenseDistribution got = to_dense(project(sampled, order), kCards, 0.0);
  REQUIRE(oracle::tv_distance(got.probs, expected.probs) < 0.01);
}

TEST_CASE("pairwise-consistent but globally empty joins abort with a diagnostic") {
  ParticleTable ab({0, 1});
  for (auto row : {std::array<Value, 2>{0, 0}, {1, 1}})
    ab.push_row(std::span<const Value>(row.data(), 2));
  ParticleTable bc({1, 2});
  for (auto row : {std::array<Value, 2>{0, 1}, {1, 0}})
    bc.push_row(std::span<const Value>(row.data(), 2));
  ParticleTable ca({2, 0});
  for (auto row : {std::array<Value, 2>{0, 0}, {1, 1}})
    ca.push_row(std::span<const Value>(row.data(), 2));
  std::vector<ParticleTable> tables{ab, bc, ca};
  JoinPlan plan = preprocess_sample_join(tables);  // nothing prunes pairwise
  Rng rng(1);
  REQUIRE_THROWS_AS(sample_join(plan, 10, rng), InferenceError);
}
