#include <doctest.h>

#include <limits>
#include <random>

#include "helpers.hpp"
#include "rann/core.hpp"

using namespace rann;

TEST_CASE("tail norm basics") {
  CHECK(tail_norm({0, 0, 0, 0}, 2, 1.0) == 0.0);
  CHECK(tail_norm({3, -1, 5, 0, 2}, 0, 1.0) == doctest::Approx(11.0));
  // frozen from the sort-based oracle: drop |5| and |3|
  CHECK(oracle::tail_norm_sorted({3, -1, 5, 0, 2}, 2, 1.0) ==
        doctest::Approx(3.0));
  CHECK(tail_norm({3, -1, 5, 0, 2}, 2, 1.0) == doctest::Approx(3.0));
  CHECK(tail_norm({3, -1, 5, 0, 2}, 5, 1.0) == 0.0);
  CHECK(tail_norm({7.5, -2.25}, 2, 2.0) == 0.0);
  CHECK_THROWS_AS(tail_norm({1, 2}, 3, 1.0), ParamError);
  CHECK_THROWS_AS(tail_norm({1, 2}, -1, 1.0), ParamError);
  CHECK_THROWS_AS(tail_norm({1, 2}, 0, 0.0), ParamError);
}

TEST_CASE("tail norm matches sort-based oracle on random points") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    int d = 1 + int(rng() % 30);
    Point pt = oracle::random_point(rng, d, -10.0, 10.0);
    int k = int(rng() % (d + 1));
    for (double p : {1.0, 2.0, 1.5}) {
      CAPTURE(trial);
      CHECK(tail_norm(pt, k, p) ==
            doctest::Approx(oracle::tail_norm_sorted(pt, k, p)).epsilon(1e-9));
    }
  }
}

TEST_CASE("tail norm is non-increasing in k and anchored at the ends") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    int d = 2 + int(rng() % 20);
    Point pt = oracle::random_point(rng, d, -5.0, 5.0);
    double p = trial % 2 == 0 ? 1.0 : 2.0;
    CHECK(tail_norm(pt, 0, p) == doctest::Approx(lp_norm(pt, p)));
    CHECK(tail_norm(pt, d, p) == 0.0);
    double prev = tail_norm(pt, 0, p);
    for (int k = 1; k <= d; ++k) {
      double cur = tail_norm(pt, k, p);
      CHECK(cur <= prev + 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("robust_nn_bruteforce basics") {
  Point q{1.0, 2.0, 3.0};
  SUBCASE("self point") {
    auto [idx, dist] = robust_nn_bruteforce({q}, q, {1.0, 1});
    CHECK(idx == 0);
    CHECK(dist == 0.0);
  }
  SUBCASE("tie broken toward the smaller index") {
    std::vector<Point> pts{{0, 0, 0}, {10, 0, 0}};
    auto [idx, dist] = robust_nn_bruteforce(pts, {0, 0, 0}, {1.0, 1});
    CHECK(idx == 0);
    CHECK(dist == 0.0);
  }
  SUBCASE("empty dataset rejected") {
    CHECK_THROWS_AS(robust_nn_bruteforce({}, q, {1.0, 0}), ParamError);
  }
  SUBCASE("k = d returns the first point at distance zero") {
    std::vector<Point> pts{{5, 5, 5}, {1, 2, 3}};
    auto [idx, dist] = robust_nn_bruteforce(pts, q, {1.0, 3});
    CHECK(idx == 0);
    CHECK(dist == 0.0);
  }
}

TEST_CASE("robust_nn_bruteforce agrees with the exhaustive sorted oracle") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 60; ++trial) {
    int n = 50, d = 10, k = 3;
    std::vector<Point> pts(n);
    for (Point& pt : pts) pt = oracle::random_point(rng, d, -10.0, 10.0);
    Point q = oracle::random_point(rng, d, -10.0, 10.0);
    auto got = robust_nn_bruteforce(pts, q, {1.0, k});
    auto want = oracle::robust_nn_sorted(pts, q, k, 1.0);
    CHECK(got.first == want.first);
    CHECK(got.second == doctest::Approx(want.second).epsilon(1e-9));
  }
}

TEST_CASE("remove_coords") {
  CHECK(remove_coords({1, 2, 3}, {}) == Point{1, 2, 3});
  CHECK(remove_coords({1, 2, 3}, {1}) == Point{1, 3});
  CHECK(remove_coords({1, 2, 3}, {0, 1, 2}).empty());
  CHECK_THROWS_AS(remove_coords({1, 2, 3}, {3}), ParamError);
  CHECK_THROWS_AS(remove_coords({1, 2, 3}, {-1}), ParamError);
}

TEST_CASE("truncated norm") {
  const double inf = std::numeric_limits<double>::infinity();
  Point pt{5, 1, 2};
  CHECK(truncated_norm(pt, inf, 1.0) == doctest::Approx(lp_norm(pt, 1.0)));
  CHECK(truncated_norm(pt, 2.0, 1.0) == doctest::Approx(5.0));
  CHECK(truncated_norm(pt, 0.0, 1.0) == 0.0);
  CHECK_THROWS_AS(truncated_norm(pt, -1.0, 1.0), ParamError);

  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    Point x = oracle::random_point(rng, 12, -4.0, 4.0);
    double max_mag = 0.0;
    for (double v : x) max_mag = std::max(max_mag, std::abs(v));
    double prev = 0.0;
    for (double psi : {0.0, 0.5, 1.0, 2.0, 3.5, 4.0}) {
      double cur = truncated_norm(x, psi, 1.0);
      CHECK(cur >= prev - 1e-12);  // non-decreasing in psi
      prev = cur;
    }
    CHECK(truncated_norm(x, max_mag, 1.0) == doctest::Approx(lp_norm(x, 1.0)));
  }
}

TEST_CASE("light/heavy predicate with boundary resolved as light") {
  CHECK(is_light({0, 0, 0}, {1.0, 0.0}, 1.0));
  CHECK_FALSE(is_light({5, 1, 2}, {2.0, 4.0}, 1.0));
  CHECK(is_light({5, 1, 2}, {2.0, 5.0}, 1.0));  // truncated norm == level
}

TEST_CASE("a light point has a small tail") {
  // if truncated_norm(pt, r/k^(1/p)) <= r then tail_k(pt) <= r
  std::mt19937_64 rng(23);
  int premise_hits = 0;
  for (int trial = 0; trial < 400; ++trial) {
    int d = 4 + int(rng() % 24);
    int k = 1 + int(rng() % (d / 2));
    double p = trial % 2 == 0 ? 1.0 : 2.0;
    double scale = trial % 3 == 0 ? 0.2 : 1.5;
    Point pt = oracle::random_point(rng, d, -scale, scale);
    std::uniform_real_distribution<double> rdist(0.5, 4.0);
    double r = rdist(rng);
    double psi = r / std::pow(double(k), 1.0 / p);
    if (is_light(pt, {psi, r}, p)) {
      ++premise_hits;
      CHECK(tail_norm(pt, k, p) <= r + 1e-9);
    }
  }
  CHECK(premise_hits > 50);  // the premise must actually trigger
}
