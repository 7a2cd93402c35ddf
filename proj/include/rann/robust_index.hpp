#pragma once

#include <memory>
#include <vector>

#include "rann/base_ann.hpp"
#include "rann/common.hpp"
#include "rann/core.hpp"
#include "rann/projection.hpp"

namespace rann {

enum class RobustMode : uint8_t { ConstantFactor = 0, EpsApprox = 1 };

struct RobustIndexConfig {
  int k = 1;
  double p = 1.0;
  double delta = 0.5;  // in (0,1); trades substructure count vs. quality
  RobustMode mode = RobustMode::ConstantFactor;
  double eps = 0.5;      // EpsApprox only
  double L_scale = 1.0;  // multiplier on the substructure count
  uint64_t seed = 0;
  AnnBackendSpec backend;
};

/// Constants derived from the config and n at build time. blocks_const and
/// coord_const are the two sampling constants (c2 and c1 in the usual
/// notation): include_prob = 1/(coord_const * k) per coordinate and block,
/// num_blocks = ceil(blocks_const * ln n) blocks per projection.
struct RobustDerived {
  double blocks_const = 0.0;
  double coord_const = 0.0;
  double include_prob = 1.0;
  int num_blocks = 1;
  int num_substructures = 1;
  double lambda = 0.0;   // light/heavy level multiplier for evaluation
  double xi = 0.0;       // EpsApprox truncation fraction
};

RobustDerived derive_robust_params(const RobustIndexConfig& cfg, int n);

struct SubQueryStat {
  int candidate = -1;
  double projected_distance = 0.0;
  bool fallback = false;
};

struct RobustQueryResult {
  int index = -1;
  double robust_distance = 0.0;
  std::vector<SubQueryStat> stats;  // one per substructure
};

/// The coordinate-sampling reduction: num_substructures projected copies of
/// the dataset, each behind a base ANN backend; queries fan out to every
/// substructure and the candidates are re-ranked by exact robust distance.
class RobustIndex {
 public:
  static RobustIndex build(std::vector<Point> points, RobustIndexConfig cfg);

  RobustQueryResult query(const Point& q) const;

  const RobustIndexConfig& config() const { return cfg_; }
  const RobustDerived& derived() const { return derived_; }
  const std::vector<Point>& points() const { return points_; }
  const std::vector<Projection>& projections() const { return projections_; }
  int dim() const { return static_cast<int>(points_.front().size()); }

  void save(BinWriter& w) const;
  static RobustIndex load(BinReader& r);

 private:
  RobustIndex() = default;
  void build_backends();

  RobustIndexConfig cfg_;
  RobustDerived derived_;
  std::vector<Point> points_;
  std::vector<Projection> projections_;
  std::vector<std::unique_ptr<AnnBackend>> backends_;
};

}  // namespace rann
