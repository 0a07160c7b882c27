#include <catch2/catch_amalgamated.hpp>

#include "dbnmon/rng.hpp"

using dbnmon::Rng;

TEST_CASE("same seed reproduces the same stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds and streams diverge") {
  Rng a(42), b(43), c(42, 1);
  bool differs_seed = false, differs_stream = false;
  for (int i = 0; i < 16; ++i) {
    differs_seed |= a.next_u32() != b.next_u32();
    differs_stream |= Rng(42).next_u32() != c.next_u32();
  }
  REQUIRE(differs_seed);
  REQUIRE(differs_stream);
}

TEST_CASE("split and derive are deterministic and order-independent") {
  Rng root(7);
  Rng a = root.split(1);
  Rng b = root.split(2);
  Rng a2 = root.split(1);
  REQUIRE(a.next_u64() == a2.next_u64());
  REQUIRE(a.next_u64() != b.next_u64());

  Rng d1 = Rng::derive(7, 100);
  Rng d2 = Rng::derive(7, 100);
  REQUIRE(d1.next_u64() == d2.next_u64());
}

TEST_CASE("next_double lies in [0,1) and has a sane mean") {
  Rng rng(1);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double u = rng.next_double();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  REQUIRE(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("next_below respects the bound and hits every value") {
  Rng rng(3);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 7000; ++i) ++counts[rng.next_below(7)];
  for (int c : counts) REQUIRE(c > 0);
}

TEST_CASE("sample_weighted follows the weights") {
  Rng rng(9);
  std::vector<double> w{0.0, 3.0, 1.0};
  std::vector<int> counts(3, 0);
  const int n = 40000;
  for (int i = 0; i < n; ++i) ++counts[rng.sample_weighted(w, 4.0)];
  REQUIRE(counts[0] == 0);
  REQUIRE(std::abs(counts[1] / double(n) - 0.75) < 0.02);
}
