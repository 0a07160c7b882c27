#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "dbnmon/generators.hpp"
#include "dbnmon/io.hpp"

using namespace dbnmon;

TEST_CASE("two-cluster generator shape") {
  Rng rng(5);
  DbnModel m = generate_two_cluster_model(5, 2, rng);
  REQUIRE(m.state_vars().size() == 10);
  REQUIRE(m.observation_vars().size() == 10);
  for (VarId v : m.state_vars()) REQUIRE(m.cardinality(v) == 2);
  REQUIRE(validate_model(m).empty());

  SECTION("every block variable has its whole block as inter-slice parents") {
    for (VarId v = 0; v < 10; ++v) {
      std::set<VarId> parents;
      for (const ParentRef& p : m.transition[v].parents) {
        REQUIRE(p.slice == Slice::previous);
        parents.insert(p.var);
      }
      std::size_t block_start = v < 5 ? 0 : 5;
      for (std::size_t i = 0; i < 5; ++i)
        REQUIRE(parents.count(static_cast<VarId>(block_start + i)) == 1);
    }
  }
}

TEST_CASE("zero cross edges keep the blocks decoupled") {
  Rng rng(9);
  DbnModel m = generate_two_cluster_model(4, 0, rng);
  for (VarId v = 0; v < 8; ++v) {
    bool in_a = v < 4;
    for (const ParentRef& p : m.transition[v].parents)
      REQUIRE((p.var < 4) == in_a);
  }
}

TEST_CASE("the requested number of cross edges is placed exactly") {
  Rng rng(13);
  DbnModel m = generate_two_cluster_model(3, 4, rng);
  std::size_t cross = 0;
  for (VarId v = 0; v < 6; ++v) {
    bool in_a = v < 3;
    for (const ParentRef& p : m.transition[v].parents)
      if ((p.var < 3) != in_a) ++cross;
  }
  REQUIRE(cross == 4);
}

TEST_CASE("cross edges beyond the available slots fail") {
  Rng rng(1);
  REQUIRE_THROWS_AS(generate_two_cluster_model(2, 9, rng), std::invalid_argument);
}

TEST_CASE("generators are deterministic, down to the serialized bytes") {
  Rng a(42), b(42);
  DbnModel m1 = generate_two_cluster_model(5, 2, a);
  DbnModel m2 = generate_two_cluster_model(5, 2, b);
  REQUIRE(m1 == m2);
  REQUIRE(model_to_json(m1) == model_to_json(m2));

  Rng c(42), d(42);
  DbnModel r1 = generate_random_parent_model(10, 3, 0.1, c);
  DbnModel r2 = generate_random_parent_model(10, 3, 0.1, d);
  REQUIRE(r1 == r2);
  REQUIRE(model_to_json(r1) == model_to_json(r2));
}

TEST_CASE("random-parent generator shape") {
  Rng rng(21);
  DbnModel m = generate_random_parent_model(50, 3, 0.1, rng);
  REQUIRE(m.state_vars().size() == 50);
  REQUIRE(validate_model(m).empty());
  for (VarId v = 0; v < 50; ++v) {
    REQUIRE(m.transition[v].parents.size() == 3);
    std::set<VarId> distinct;
    for (const ParentRef& p : m.transition[v].parents) {
      REQUIRE(p.slice == Slice::previous);  // no intra-slice state edges
      distinct.insert(p.var);
      REQUIRE(p.var < 50);
    }
    REQUIRE(distinct.size() == 3);
    REQUIRE(m.prior[v].parents.empty());
  }
}

TEST_CASE("skewed rows stay inside the skew arms") {
  Rng rng(31);
  DbnModel m = generate_random_parent_model(12, 3, 0.05, rng);
  for (VarId v = 0; v < 12; ++v) {
    for (const Cpt* cpt : {&m.prior[v], &m.transition[v]}) {
      for (double p : cpt->probs) {
        bool low = p > 0.0 && p < 0.05;
        bool high = p > 0.95 && p < 1.0;
        REQUIRE((low || high));
      }
    }
  }
}

TEST_CASE("a single independent chain is a legal degenerate case") {
  Rng rng(3);
  DbnModel m = generate_random_parent_model(1, 0, 0.2, rng);
  REQUIRE(m.state_vars().size() == 1);
  REQUIRE(m.transition[0].parents.empty());
  REQUIRE(validate_model(m).empty());
}

TEST_CASE("generated cpt rows are normalized") {
  Rng rng(7);
  DbnModel m1 = generate_two_cluster_model(5, 3, rng);
  DbnModel m2 = generate_random_parent_model(20, 3, 0.1, rng);
  for (const DbnModel* m : {&m1, &m2}) {
    for (const auto& cpts : {m->prior, m->transition}) {
      for (const Cpt& c : cpts) {
        std::size_t card = static_cast<std::size_t>(m->cardinality(c.child));
        for (std::size_t r = 0; r * card < c.probs.size(); ++r) {
          double sum = 0.0;
          for (std::size_t k = 0; k < card; ++k) sum += c.probs[r * card + k];
          REQUIRE(std::abs(sum - 1.0) <= 1e-9);
        }
      }
    }
  }
}
