#include <doctest.h>

#include <random>
#include <sstream>

#include "helpers.hpp"
#include "rann/budgeted.hpp"
#include "rann/eval.hpp"
#include "rann/robust_index.hpp"

using namespace rann;

namespace {

double set_cost(const std::vector<int>& ignored, const std::vector<double>& w) {
  double total = 0.0;
  for (int i : ignored) total += w[i];
  return total;
}

}  // namespace

TEST_CASE("exact admissible distance on hand instances") {
  SUBCASE("identical points") {
    AdmissibleResult res = admissible_distance_exact({1, 2}, {1, 2}, {0.5, 0.5});
    CHECK(res.distance == 0.0);
  }
  SUBCASE("budget one of two unit-cost coordinates") {
    AdmissibleResult res = admissible_distance_exact({5, 3}, {0, 0}, {1, 1});
    CHECK(res.distance == doctest::Approx(3.0));
    CHECK(res.ignored == std::vector<int>{0});
  }
  SUBCASE("all unit costs drop exactly the largest coordinate") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      int d = 2 + int(rng() % 8);
      Point a = oracle::random_point(rng, d, -4.0, 4.0);
      Point b = oracle::random_point(rng, d, -4.0, 4.0);
      std::vector<double> costs(d, 1.0);
      AdmissibleResult res = admissible_distance_exact(a, b, costs);
      double total = 0.0, largest = 0.0;
      for (int j = 0; j < d; ++j) {
        total += std::abs(a[j] - b[j]);
        largest = std::max(largest, std::abs(a[j] - b[j]));
      }
      CHECK(res.distance == doctest::Approx(total - largest).epsilon(1e-9));
    }
  }
  SUBCASE("dimension cap") {
    Point big(25, 1.0);
    CHECK_THROWS_AS(
        admissible_distance_exact(big, big, std::vector<double>(25, 0.5)),
        ParamError);
  }
}

TEST_CASE("approx is sandwiched between exact and (1+eps) exact") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 120; ++trial) {
    int d = 2 + int(rng() % 11);
    Point a = oracle::random_point(rng, d, -5.0, 5.0);
    Point b = oracle::random_point(rng, d, -5.0, 5.0);
    std::vector<double> costs(d);
    for (double& c : costs) {
      c = (rng() % 10 == 0) ? 0.0 : 0.05 + 0.95 * double(rng() % 1000) / 1000.0;
    }
    AdmissibleResult exact = admissible_distance_exact(a, b, costs);
    for (double eps : {0.1, 0.5}) {
      AdmissibleResult approx = admissible_distance_approx(a, b, costs, eps);
      CAPTURE(trial);
      CAPTURE(eps);
      CHECK(approx.distance >= exact.distance - 1e-9);
      CHECK(approx.distance <= (1.0 + eps) * exact.distance + 1e-9);
      CHECK(set_cost(approx.ignored, costs) <= 1.0 + 1e-9);
      CHECK(set_cost(exact.ignored, costs) <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("sandwich holds under heavy value ties and integer data") {
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 80; ++trial) {
    int d = 3 + int(rng() % 9);
    Point a(d), b(d, 0.0);
    std::vector<double> costs(d);
    for (int j = 0; j < d; ++j) {
      a[j] = double(rng() % 4);  // many repeated values, including zeros
      costs[j] = 0.25 * (1 + int(rng() % 4));
    }
    AdmissibleResult exact = admissible_distance_exact(a, b, costs);
    for (double eps : {0.1, 0.5, 0.9}) {
      AdmissibleResult approx = admissible_distance_approx(a, b, costs, eps);
      CHECK(approx.distance >= exact.distance - 1e-9);
      CHECK(approx.distance <= (1.0 + eps) * exact.distance + 1e-9);
      CHECK(set_cost(approx.ignored, costs) <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("exact enumeration at the dimension cap") {
  std::mt19937_64 rng(59);
  const int d = 24;
  Point a = oracle::random_point(rng, d, -3.0, 3.0);
  Point b = oracle::random_point(rng, d, -3.0, 3.0);
  std::vector<double> costs(d);
  for (double& c : costs) c = 0.1 + 0.9 * double(rng() % 100) / 100.0;
  AdmissibleResult exact = admissible_distance_exact(a, b, costs);
  AdmissibleResult approx = admissible_distance_approx(a, b, costs, 0.1);
  CHECK(approx.distance >= exact.distance - 1e-9);
  CHECK(approx.distance <= 1.1 * exact.distance + 1e-9);
}

TEST_CASE("partition gadget: scaled instance has admissible distance one") {
  // integers (1,2,3,4,5,5) halve into 10+10, so with p_i = b_i/10 used as
  // both point and costs, the optimum drops cost exactly 1 and keeps 1.
  Point p{0.1, 0.2, 0.3, 0.4, 0.5, 0.5};
  Point origin(6, 0.0);
  AdmissibleResult exact = admissible_distance_exact(p, origin, p);
  CHECK(exact.distance == doctest::Approx(1.0));
  AdmissibleResult approx = admissible_distance_approx(p, origin, p, 0.5);
  CHECK(approx.distance >= 1.0 - 1e-9);
  CHECK(approx.distance <= 1.5 + 1e-9);
}

TEST_CASE("weighted truncation") {
  SUBCASE("formula evaluation") {
    Point out = trunc_weighted({10, 1}, 3.0, {0.5, 0.5}, 2.0);
    CHECK(out[0] == doctest::Approx(1.0));
    CHECK(out[1] == doctest::Approx(1.0));
  }
  SUBCASE("r = 0 truncates everything") {
    Point out = trunc_weighted({10, -4}, 0.0, {0.5, 0.5}, 2.0);
    CHECK(out == Point{0.0, 0.0});
  }
  SUBCASE("tiny costs truncate toward zero") {
    Point out = trunc_weighted({10}, 1.0, {1e-9}, 2.0);
    CHECK(out[0] == doctest::Approx(0.0).epsilon(1e-6));
  }
  SUBCASE("c1 must exceed every cost") {
    CHECK_THROWS_AS(trunc_weighted({1, 1}, 1.0, {0.5, 0.9}, 0.9), ParamError);
  }
}

TEST_CASE("affordable bad sets keep their truncation mass under r") {
  // sum over the bad set of r/(c1/w_i - 1) <= r whenever cost(bad) <= 1 and
  // c1 >= 2
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    int size = 1 + int(rng() % 10);
    std::vector<double> w(size);
    double total = 0.0;
    for (double& c : w) {
      c = 0.01 + 0.99 * double(rng() % 1000) / 1000.0;
      total += c;
    }
    if (total > 1.0) {
      for (double& c : w) c /= total;  // rescale to cost exactly <= 1
    }
    double r = 0.5 + double(rng() % 100) / 10.0;
    double c1 = 2.0 + double(rng() % 100) / 5.0;
    double sum = 0.0;
    for (double c : w) sum += r / (c1 / c - 1.0);
    CHECK(sum <= r + 1e-9);
  }
}

TEST_CASE("budgeted derived constants") {
  BudgetedConfig cfg;
  cfg.delta = 0.5;
  BudgetedDerived d = derive_budgeted_params(cfg, 1000);
  CHECK(d.blocks_const == 4.0);
  CHECK(d.coord_const == doctest::Approx(16.0));
  CHECK(d.num_blocks == int(std::ceil(4.0 * std::log(1000.0))));
}

TEST_CASE("uniform costs reproduce the unweighted inclusion probability") {
  const int d = 4000, k = 4, t = 1;
  const double c1 = 16.0;
  std::vector<double> costs(d, 1.0 / k);
  Projection proj = sample_weighted_projection(costs, c1, t, 3, 1);
  double measured = double(proj.entries.size()) / d;
  double predicted = (1.0 / k) / c1;
  double se = std::sqrt(predicted * (1 - predicted) / d);
  CHECK(std::abs(measured - predicted) <= 4.0 * se);
  for (const ProjEntry& e : proj.entries) {
    CHECK(e.scale == doctest::Approx(c1 * k));
  }
}

TEST_CASE("budgeted index: build determinism and single point") {
  BudgetedConfig cfg;
  cfg.seed = 5;
  std::vector<double> costs{0.3, 0.8, 0.5};
  auto serialize = [&] {
    BudgetedIndex idx = BudgetedIndex::build({{1, 2, 3}, {4, 5, 6}}, costs, cfg);
    std::stringstream buf;
    BinWriter w(buf);
    idx.save(w);
    return buf.str();
  };
  std::string first = serialize();
  CHECK(first == serialize());

  std::stringstream buf(first);
  BinReader r(buf);
  BudgetedIndex loaded = BudgetedIndex::load(r);
  BudgetedQueryResult res = loaded.query({1, 2, 3});
  CHECK(res.index == 0);
  CHECK(res.distance == 0.0);

  BudgetedIndex single = BudgetedIndex::build({{9, 9, 9}}, costs, cfg);
  CHECK(single.query({0, 0, 0}).index == 0);
}

TEST_CASE("planted budgeted instances are recovered") {
  BudgetedPlantedInstance inst =
      gen_planted_budgeted(200, 32, 1.0, 10.0, 17, 15, CostProfile::Random);
  BudgetedConfig cfg;
  cfg.seed = 23;
  BudgetedIndex idx = BudgetedIndex::build(inst.data, inst.costs, cfg);
  int hits = 0;
  for (size_t qi = 0; qi < inst.queries.size(); ++qi) {
    BudgetedQueryResult res = idx.query(inst.queries[qi]);
    hits += res.index == inst.truth[qi].planted;
    CHECK(set_cost(res.ignored, inst.costs) <= 1.0 + 1e-9);
  }
  CHECK(double(hits) / inst.queries.size() >= 0.9);
}

TEST_CASE("unit costs match the k=1 unweighted answer on planted data") {
  PlantedInstance inst = gen_planted(150, 24, 1, 1.0, 12.0, 29, 10);
  std::vector<double> costs(24, 1.0);

  BudgetedConfig bcfg;
  bcfg.seed = 31;
  BudgetedIndex budgeted = BudgetedIndex::build(inst.data, costs, bcfg);
  RobustIndexConfig rcfg;
  rcfg.k = 1;
  rcfg.seed = 31;
  RobustIndex robust = RobustIndex::build(inst.data, rcfg);

  for (size_t qi = 0; qi < inst.queries.size(); ++qi) {
    int b = budgeted.query(inst.queries[qi]).index;
    int r = robust.query(inst.queries[qi]).index;
    CHECK(b == inst.truth[qi].planted);
    CHECK(r == inst.truth[qi].planted);
  }
}

TEST_CASE("zero-cost coordinates are stripped and reported as ignored") {
  std::vector<double> costs{0.0, 0.6, 0.7, 0.0};
  std::vector<Point> pts{{100, 1, 2, -50}, {0, 8, 9, 3}};
  BudgetedConfig cfg;
  cfg.seed = 41;
  BudgetedIndex idx = BudgetedIndex::build(pts, costs, cfg);
  BudgetedQueryResult res = idx.query({-100, 1, 2, 77});
  CHECK(res.index == 0);
  CHECK(res.distance == 0.0);
  // differing zero-cost coordinates come back as ignored for free
  CHECK(std::find(res.ignored.begin(), res.ignored.end(), 0) != res.ignored.end());
  CHECK(std::find(res.ignored.begin(), res.ignored.end(), 3) != res.ignored.end());
}
