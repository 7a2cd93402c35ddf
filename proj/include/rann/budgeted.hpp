#pragma once

#include <memory>
#include <vector>

#include "rann/base_ann.hpp"
#include "rann/common.hpp"
#include "rann/projection.hpp"

namespace rann {

/// Distance between two points under a coordinate-cost budget: the minimum
/// L1 distance over all ways of ignoring coordinates of total cost <= 1.
struct AdmissibleResult {
  double distance = 0.0;
  std::vector<int> ignored;  // ascending coordinate indices, cost <= 1
};

/// Exhaustive minimum over every affordable ignore set. Exponential in d;
/// guarded at d <= 24.
AdmissibleResult admissible_distance_exact(const Point& a, const Point& b,
                                           const std::vector<double>& costs);

/// (1+eps)-approximation of the admissible distance via a scaled
/// min-knapsack DP: for each guess of the largest kept coordinate, values
/// round down to a grid of O(d^2/eps) cells and a weight-minimizing DP picks
/// the ignore set. Runs in O(d^4/eps); the returned set always costs <= 1.
AdmissibleResult admissible_distance_approx(const Point& a, const Point& b,
                                            const std::vector<double>& costs,
                                            double eps);

/// Cost-aware truncation: coordinate i caps at r / (c1/costs[i] - 1), so
/// low-cost (untrustworthy) coordinates truncate toward zero. Returns the
/// vector of truncated magnitudes.
Point trunc_weighted(const Point& pt, double r, const std::vector<double>& costs,
                     double c1);

/// L1 norm of the weighted truncation <= level.
bool is_light_weighted(const Point& pt, double r, const std::vector<double>& costs,
                       double c1, double level);

struct BudgetedConfig {
  double delta = 0.5;
  double eps = 0.5;  // knapsack approximation used at query re-ranking
  double L_scale = 1.0;
  uint64_t seed = 0;
  AnnBackendSpec backend;
};

struct BudgetedDerived {
  double blocks_const = 4.0;
  double coord_const = 16.0;  // 2 * blocks_const / delta
  int num_blocks = 1;
  int num_substructures = 1;
};

BudgetedDerived derive_budgeted_params(const BudgetedConfig& cfg, int n);

struct BudgetedQueryResult {
  int index = -1;
  double distance = 0.0;
  std::vector<int> ignored;
  std::vector<int> candidates;  // distinct candidates, one per substructure set
  int fallbacks = 0;
};

/// The cost-weighted variant of the robust index: scaled weighted
/// projections in front of 2-ANN backends, with candidates re-ranked by the
/// approximate admissible distance.
class BudgetedIndex {
 public:
  static BudgetedIndex build(std::vector<Point> points,
                             std::vector<double> costs, BudgetedConfig cfg);

  BudgetedQueryResult query(const Point& q) const;

  const BudgetedConfig& config() const { return cfg_; }
  const BudgetedDerived& derived() const { return derived_; }
  const std::vector<double>& costs() const { return costs_; }
  const std::vector<Point>& points() const { return points_; }

  void save(BinWriter& w) const;
  static BudgetedIndex load(BinReader& r);

 private:
  BudgetedIndex() = default;
  void strip_and_derive();
  void build_backends();

  BudgetedConfig cfg_;
  BudgetedDerived derived_;
  std::vector<Point> points_;   // original space
  std::vector<double> costs_;   // original space
  std::vector<int> kept_;       // original indices of nonzero-cost coords
  std::vector<double> kept_costs_;
  std::vector<Point> stripped_;
  std::vector<Projection> projections_;  // over the stripped space
  std::vector<std::unique_ptr<AnnBackend>> backends_;
};

}  // namespace rann
