#include <cmath>

#include "chemcomm/prng.hpp"
#include "doctest.h"

using chemcomm::num::Prng;

TEST_CASE("same seed and stream replay identically") {
  Prng a(42, 0), b(42, 0);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct streams diverge within the first draws") {
  Prng a(42, 0), b(42, 1);
  bool differ = false;
  for (int i = 0; i < 16 && !differ; ++i) differ = a.next_u64() != b.next_u64();
  CHECK(differ);
}

TEST_CASE("distinct master seeds diverge within the first draws") {
  Prng a(42, 0), b(43, 0);
  bool differ = false;
  for (int i = 0; i < 16 && !differ; ++i) differ = a.next_u64() != b.next_u64();
  CHECK(differ);
}

TEST_CASE("uniform range and moments") {
  Prng rng(7, 0);
  const int n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    sum2 += u * u;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::fabs(mean - 0.5) < 0.01);
  CHECK(std::fabs(var - 1.0 / 12.0) < 0.005);
}

TEST_CASE("gaussian moments and degenerate std") {
  Prng rng(7, 1);
  CHECK(rng.next_gaussian(5.0, 0.0) == 5.0);
  const int n = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.next_gaussian(0.0, 1.0);
    sum += z;
    sum2 += z * z;
  }
  const double mean = sum / n;
  CHECK(std::fabs(mean) < 0.02);
  CHECK(std::fabs(std::sqrt(sum2 / n - mean * mean) - 1.0) < 0.02);
}

TEST_CASE("negative std rejected") {
  Prng rng(1, 0);
  CHECK_THROWS_AS(rng.next_gaussian(0.0, -1.0), std::invalid_argument);
}

TEST_CASE("bounded draws are in range") {
  Prng rng(9, 2);
  for (int i = 0; i < 1000; ++i) CHECK(rng.next_below(7) < 7);
  CHECK_THROWS_AS(rng.next_below(0), std::invalid_argument);
}

TEST_CASE("shuffle is deterministic per stream") {
  std::vector<int> v1{1, 2, 3, 4, 5, 6, 7, 8}, v2 = v1;
  Prng a(11, 3), b(11, 3);
  a.shuffle(v1);
  b.shuffle(v2);
  CHECK(v1 == v2);
}
