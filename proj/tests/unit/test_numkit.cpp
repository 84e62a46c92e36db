#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "fedra/error.hpp"
#include "fedra/numkit.hpp"
#include "fedra/rng.hpp"

using namespace fedra;

TEST_SUITE("numkit") {

TEST_CASE("l1_distance examples") {
  CHECK(l1_distance({0, 0}, {0, 0}) == 0.0);
  CHECK(l1_distance({1, 2}, {3, -1}) == 5.0);
  CHECK(l1_distance({1, 1, 1}, {2, 2, 2}) == 3.0);
  CHECK_THROWS_AS(l1_distance({1, 2}, {1}), Error);
}

TEST_CASE("l2_norm examples") {
  CHECK(l2_norm({0, 0, 0}) == 0.0);
  CHECK(l2_norm({3, 4}) == 5.0);
  CHECK(l2_norm({1, 1, 1, 1}) == 2.0);
}

TEST_CASE("update vectors reject non-finite and empty input") {
  CHECK_THROWS_AS(UpdateVector({1.0, std::numeric_limits<double>::quiet_NaN()}), Error);
  CHECK_THROWS_AS(UpdateVector({std::numeric_limits<double>::infinity()}), Error);
  CHECK_THROWS_AS(UpdateVector(std::vector<double>{}), Error);
}

TEST_CASE("weighted_mean examples") {
  const std::vector<UpdateVector> a{{1}, {3}};
  CHECK(weighted_mean(a, std::vector<double>{1, 1}) == UpdateVector{2});
  CHECK(weighted_mean(a, std::vector<double>{3, 1}) == UpdateVector{1.5});
  const std::vector<UpdateVector> single{{2, 2}};
  CHECK(weighted_mean(single, std::vector<double>{7}) == UpdateVector{2, 2});
  CHECK_THROWS_AS(weighted_mean(a, std::vector<double>{0, 0}), Error);
  const std::vector<UpdateVector> mixed{{1}, {1, 2}};
  CHECK_THROWS_AS(weighted_mean(mixed, std::vector<double>{1, 1}), Error);
}

TEST_CASE("coordinate_median examples") {
  const std::vector<UpdateVector> a{{1, 2}, {3, 4}, {100, -5}};
  CHECK(coordinate_median(a) == UpdateVector{3, 2});
  const std::vector<UpdateVector> b{{1}, {3}};
  CHECK(coordinate_median(b) == UpdateVector{2});
  const std::vector<UpdateVector> c{{5, 5}};
  CHECK(coordinate_median(c) == UpdateVector{5, 5});
  CHECK_THROWS_AS(coordinate_median(std::vector<UpdateVector>{}), Error);
}

TEST_CASE("coordinate_trimmed_mean examples") {
  const std::vector<UpdateVector> a{{1}, {3}, {100}};
  CHECK(coordinate_trimmed_mean(a, 1) == UpdateVector{3});
  const std::vector<UpdateVector> b{{1}, {2}, {3}, {4}};
  CHECK(coordinate_trimmed_mean(b, 1) == UpdateVector{2.5});
  const std::vector<UpdateVector> c{{7}};
  CHECK(coordinate_trimmed_mean(c, 0) == UpdateVector{7});
  CHECK_THROWS_AS(coordinate_trimmed_mean(b, 2), Error);
}

namespace {
UpdateVector random_vec(Rng& rng, std::size_t d) {
  std::normal_distribution<double> normal(0.0, 3.0);
  std::vector<double> v(d);
  for (double& x : v) x = normal(rng);
  return UpdateVector(v);
}
}  // namespace

TEST_CASE("triangle inequality on random triples") {
  Rng rng = make_rng(11, {1});
  for (int t = 0; t < 500; ++t) {
    const std::size_t d = 1 + t % 6;
    const auto a = random_vec(rng, d), b = random_vec(rng, d), c = random_vec(rng, d);
    CHECK(l1_distance(a, c) <= l1_distance(a, b) + l1_distance(b, c) + 1e-12);
    CHECK(l2_distance(a, c) <= l2_distance(a, b) + l2_distance(b, c) + 1e-12);
    std::vector<double> sum(d);
    for (std::size_t k = 0; k < d; ++k) sum[k] = a[k] + b[k];
    CHECK(l2_norm(UpdateVector(sum)) <= l2_norm(a) + l2_norm(b) + 1e-12);
  }
}

TEST_CASE("weighted_mean is permutation and scale invariant") {
  Rng rng = make_rng(11, {2});
  std::uniform_real_distribution<double> wd(0.1, 100.0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + t % 9, d = 1 + t % 4;
    std::vector<UpdateVector> vs;
    std::vector<double> ws;
    for (std::size_t i = 0; i < n; ++i) {
      vs.push_back(random_vec(rng, d));
      ws.push_back(wd(rng));
    }
    const auto base = weighted_mean(vs, ws);

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<UpdateVector> pv;
    std::vector<double> pw, sw;
    for (auto i : perm) {
      pv.push_back(vs[i]);
      pw.push_back(ws[i]);
    }
    for (double w : ws) sw.push_back(w * 37.5);
    const auto permuted = weighted_mean(pv, pw);
    const auto rescaled = weighted_mean(vs, sw);
    for (std::size_t k = 0; k < d; ++k) {
      const double tol = 1e-15 * std::max(1.0, std::fabs(base[k]));
      CHECK(std::fabs(permuted[k] - base[k]) <= tol);
      CHECK(std::fabs(rescaled[k] - base[k]) <= tol);
    }
  }
}

TEST_CASE("median equals maximal trimmed mean for odd counts") {
  Rng rng = make_rng(11, {3});
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + 2 * (t % 5), d = 1 + t % 3;
    std::vector<UpdateVector> vs;
    for (std::size_t i = 0; i < n; ++i) vs.push_back(random_vec(rng, d));
    CHECK(coordinate_median(vs) == coordinate_trimmed_mean(vs, (n - 1) / 2));
  }
}

}  // TEST_SUITE
