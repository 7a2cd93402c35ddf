#include "rann/budgeted.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "rann/core.hpp"
#include "rann/parallel.hpp"

namespace rann {

namespace {

constexpr int kExactDimCap = 24;
constexpr double kBudget = 1.0;
constexpr double kCostSlack = 1e-9;

void check_costs(const std::vector<double>& costs, size_t d) {
  if (costs.size() != d) throw ParamError("cost vector dimension mismatch");
  for (double c : costs) {
    if (!(c >= 0.0 && c <= 1.0)) throw ParamError("costs must be in [0, 1]");
  }
}

double ignored_cost(const std::vector<int>& ignored,
                    const std::vector<double>& costs) {
  double total = 0.0;
  for (int i : ignored) total += costs[i];
  return total;
}

}  // namespace

AdmissibleResult admissible_distance_exact(const Point& a, const Point& b,
                                           const std::vector<double>& costs) {
  if (a.size() != b.size()) throw ParamError("dimension mismatch");
  check_costs(costs, a.size());
  const int d = static_cast<int>(a.size());
  if (d > kExactDimCap) {
    throw ParamError("exact admissible distance limited to d <= 24");
  }

  std::vector<double> value(d);
  double total = 0.0;
  for (int i = 0; i < d; ++i) {
    value[i] = std::abs(a[i] - b[i]);
    total += value[i];
  }

  // Gray-code walk over ignore sets: one coordinate flips per step, so the
  // running value/cost sums update in O(1).
  uint32_t gray = 0;
  double cur_value = 0.0, cur_cost = 0.0;
  double best_dropped = 0.0;
  uint32_t best_mask = 0;
  const uint64_t steps = 1ULL << d;
  for (uint64_t s = 1; s < steps; ++s) {
    int bit = std::countr_zero(s);
    uint32_t flip = 1u << bit;
    gray ^= flip;
    if (gray & flip) {
      cur_value += value[bit];
      cur_cost += costs[bit];
    } else {
      cur_value -= value[bit];
      cur_cost -= costs[bit];
    }
    if (cur_cost <= kBudget + kCostSlack && cur_value > best_dropped) {
      best_dropped = cur_value;
      best_mask = gray;
    }
  }

  AdmissibleResult res;
  res.distance = std::max(0.0, total - best_dropped);
  for (int i = 0; i < d; ++i) {
    if (best_mask & (1u << i)) res.ignored.push_back(i);
  }
  return res;
}

AdmissibleResult admissible_distance_approx(const Point& a, const Point& b,
                                            const std::vector<double>& costs,
                                            double eps) {
  if (a.size() != b.size()) throw ParamError("dimension mismatch");
  check_costs(costs, a.size());
  if (!(eps > 0.0 && eps < 1.0)) throw ParamError("eps must be in (0, 1)");
  const int d = static_cast<int>(a.size());

  AdmissibleResult res;
  std::vector<int> items;  // coordinates with positive value and cost
  std::vector<double> value(d);
  for (int i = 0; i < d; ++i) {
    value[i] = std::abs(a[i] - b[i]);
    if (value[i] <= 0.0) continue;
    if (costs[i] <= 0.0) {
      res.ignored.push_back(i);  // free to drop
    } else {
      items.push_back(i);
    }
  }

  double items_cost = 0.0;
  for (int i : items) items_cost += costs[i];
  if (items_cost <= kBudget + kCostSlack) {
    // Everything that separates a from b is affordable to ignore.
    res.ignored.insert(res.ignored.end(), items.begin(), items.end());
    std::sort(res.ignored.begin(), res.ignored.end());
    res.distance = 0.0;
    return res;
  }

  // Sort by value; the guess g is the largest coordinate the optimum keeps,
  // which forces every larger one to be dropped.
  std::sort(items.begin(), items.end(), [&](int x, int y) {
    if (value[x] != value[y]) return value[x] > value[y];
    return x < y;
  });
  const int m = static_cast<int>(items.size());

  double best_value = std::numeric_limits<double>::infinity();
  std::vector<int> best_ignored;

  std::vector<int> scaled(m);
  std::vector<double> dp, dp_next;
  std::vector<std::vector<uint8_t>> keep_choice;

  double prefix_cost = 0.0;
  for (int gi = 0; gi < m; ++gi) {
    double budget = kBudget - prefix_cost;
    if (budget < -kCostSlack) break;  // every smaller guess is infeasible too
    const int g = items[gi];
    const int free_count = m - gi - 1;
    const double mu = eps * value[g] / std::max(1, m);

    int grid = 0;
    for (int f = 0; f < free_count; ++f) {
      scaled[f] = static_cast<int>(std::floor(value[items[gi + 1 + f]] / mu));
      grid += scaled[f];
    }

    dp.assign(grid + 1, 0.0);
    keep_choice.assign(free_count, std::vector<uint8_t>(grid + 1, 0));
    for (int f = 0; f < free_count; ++f) {
      const int coord = items[gi + 1 + f];
      dp_next.assign(grid + 1, 0.0);
      for (int j = 0; j <= grid; ++j) {
        double drop = dp[j] + costs[coord];
        double keep = j >= scaled[f]
                          ? dp[j - scaled[f]]
                          : std::numeric_limits<double>::infinity();
        if (keep <= drop) {
          dp_next[j] = keep;
          keep_choice[f][j] = 1;
        } else {
          dp_next[j] = drop;
        }
      }
      dp.swap(dp_next);
    }

    int first_feasible = -1;
    for (int j = 0; j <= grid; ++j) {
      if (dp[j] <= budget + kCostSlack) {
        first_feasible = j;
        break;
      }
    }
    if (first_feasible < 0) {
      prefix_cost += costs[g];
      continue;
    }

    double cand_value = value[g];
    std::vector<int> cand_ignored(res.ignored);
    for (int pi = 0; pi < gi; ++pi) cand_ignored.push_back(items[pi]);
    int j = first_feasible;
    for (int f = free_count - 1; f >= 0; --f) {
      const int coord = items[gi + 1 + f];
      if (keep_choice[f][j]) {
        cand_value += value[coord];
        j -= scaled[f];
      } else {
        cand_ignored.push_back(coord);
      }
    }
    if (cand_value < best_value) {
      best_value = cand_value;
      best_ignored = std::move(cand_ignored);
    }
    prefix_cost += costs[g];
  }

  res.distance = best_value;
  res.ignored = std::move(best_ignored);
  std::sort(res.ignored.begin(), res.ignored.end());
  if (ignored_cost(res.ignored, costs) > kBudget + kCostSlack) {
    throw std::logic_error("admissible_distance_approx produced an unaffordable set");
  }
  return res;
}

Point trunc_weighted(const Point& pt, double r, const std::vector<double>& costs,
                     double c1) {
  check_costs(costs, pt.size());
  if (!(r >= 0.0)) throw ParamError("r must be >= 0");
  for (double c : costs) {
    if (!(c > 0.0)) throw ParamError("weighted truncation needs positive costs");
    if (c1 <= c) throw ParamError("c1 must exceed every cost");
  }
  Point out(pt.size());
  for (size_t i = 0; i < pt.size(); ++i) {
    out[i] = std::min(std::abs(pt[i]), r / (c1 / costs[i] - 1.0));
  }
  return out;
}

bool is_light_weighted(const Point& pt, double r, const std::vector<double>& costs,
                       double c1, double level) {
  return lp_norm(trunc_weighted(pt, r, costs, c1), 1.0) <= level;
}

BudgetedDerived derive_budgeted_params(const BudgetedConfig& cfg, int n) {
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) {
    throw ParamError("delta must be in (0, 1)");
  }
  if (!(cfg.eps > 0.0 && cfg.eps < 1.0)) throw ParamError("eps must be in (0, 1)");
  if (!(cfg.L_scale > 0.0)) throw ParamError("L_scale must be positive");
  if (n < 1) throw ParamError("dataset must be non-empty");
  BudgetedDerived d;
  d.blocks_const = 4.0;
  d.coord_const = 2.0 * d.blocks_const / cfg.delta;
  const double log_n = std::log(std::max(2, n));
  d.num_blocks = std::max(1, static_cast<int>(std::ceil(d.blocks_const * log_n)));
  d.num_substructures = std::max(
      1, static_cast<int>(std::ceil(cfg.L_scale * std::pow(double(n), cfg.delta) *
                                    log_n)));
  return d;
}

BudgetedIndex BudgetedIndex::build(std::vector<Point> points,
                                   std::vector<double> costs,
                                   BudgetedConfig cfg) {
  check_dataset(points);
  check_costs(costs, points.front().size());
  cfg.backend.p = 1.0;  // the budgeted problem is defined under L1

  BudgetedIndex idx;
  idx.cfg_ = cfg;
  idx.points_ = std::move(points);
  idx.costs_ = std::move(costs);
  idx.strip_and_derive();

  idx.projections_.resize(idx.derived_.num_substructures);
  for (int j = 0; j < idx.derived_.num_substructures; ++j) {
    idx.projections_[j] =
        sample_weighted_projection(idx.kept_costs_, idx.derived_.coord_const,
                                   idx.derived_.num_blocks, cfg.seed,
                                   static_cast<uint64_t>(j + 1));
  }
  idx.build_backends();
  return idx;
}

void BudgetedIndex::strip_and_derive() {
  derived_ = derive_budgeted_params(cfg_, static_cast<int>(points_.size()));
  kept_.clear();
  kept_costs_.clear();
  for (size_t i = 0; i < costs_.size(); ++i) {
    if (costs_[i] > 0.0) {
      kept_.push_back(static_cast<int>(i));
      kept_costs_.push_back(costs_[i]);
    }
  }
  if (kept_.empty()) {
    throw ParamError("all coordinates have zero cost; nothing to index");
  }
  stripped_.assign(points_.size(), Point(kept_.size()));
  for (size_t i = 0; i < points_.size(); ++i) {
    for (size_t j = 0; j < kept_.size(); ++j) {
      stripped_[i][j] = points_[i][kept_[j]];
    }
  }
}

void BudgetedIndex::build_backends() {
  backends_.resize(projections_.size());
  parallel_for(projections_.size(), [&](size_t j) {
    std::vector<Point> projected;
    projected.reserve(stripped_.size());
    for (const Point& pt : stripped_) {
      projected.push_back(projections_[j].apply(pt, 1.0));
    }
    AnnBackendSpec spec = cfg_.backend;
    spec.seed = cfg_.seed ^ (0x9e3779b97f4a7c15ULL * (j + 1));
    backends_[j] = build_backend(projected, spec);
  });
}

BudgetedQueryResult BudgetedIndex::query(const Point& q) const {
  if (q.size() != points_.front().size()) {
    throw ParamError("query dimension mismatch");
  }
  Point qs(kept_.size());
  for (size_t j = 0; j < kept_.size(); ++j) qs[j] = q[kept_[j]];

  const size_t L = backends_.size();
  std::vector<AnnResult> sub(L);
  parallel_for(L, [&](size_t j) {
    sub[j] = backends_[j]->query(projections_[j].apply(qs, 1.0));
  });

  BudgetedQueryResult result;
  std::vector<char> seen(points_.size(), 0);
  for (const AnnResult& r : sub) {
    if (r.fallback) ++result.fallbacks;
    if (r.index >= 0 && !seen[r.index]) {
      seen[r.index] = 1;
      result.candidates.push_back(r.index);
    }
  }
  std::sort(result.candidates.begin(), result.candidates.end());

  result.distance = std::numeric_limits<double>::infinity();
  std::vector<int> best_ignored;
  for (int cand : result.candidates) {
    AdmissibleResult ar =
        admissible_distance_approx(stripped_[cand], qs, kept_costs_, cfg_.eps);
    if (ar.distance < result.distance) {
      result.distance = ar.distance;
      result.index = cand;
      best_ignored = std::move(ar.ignored);
    }
  }

  // Report ignored coordinates in the original space; zero-cost coordinates
  // that differ are always ignored for free.
  result.ignored.clear();
  for (int j : best_ignored) result.ignored.push_back(kept_[j]);
  if (result.index >= 0) {
    for (size_t i = 0; i < costs_.size(); ++i) {
      if (costs_[i] == 0.0 && points_[result.index][i] != q[i]) {
        result.ignored.push_back(static_cast<int>(i));
      }
    }
  }
  std::sort(result.ignored.begin(), result.ignored.end());
  return result;
}

void BudgetedIndex::save(BinWriter& w) const {
  w.raw("RIDX", 4);
  w.u32(1);
  w.u8(1);  // mode tag: budgeted
  w.u64(points_.size());
  w.u32(static_cast<uint32_t>(points_.front().size()));
  w.f64(cfg_.delta);
  w.f64(cfg_.eps);
  w.f64(cfg_.L_scale);
  w.u64(cfg_.seed);
  for (double c : costs_) w.f64(c);
  w.u64(projections_.size());
  for (const Projection& proj : projections_) proj.save(w);
  cfg_.backend.save(w);
  for (const Point& pt : points_) {
    w.raw(pt.data(), pt.size() * sizeof(double));
  }
}

BudgetedIndex BudgetedIndex::load(BinReader& r) {
  char magic[4];
  r.raw(magic, 4);
  if (std::string(magic, 4) != "RIDX") throw DataError("not an index file");
  uint32_t version = r.u32();
  if (version != 1) {
    throw DataError("unsupported index version " + std::to_string(version));
  }
  uint8_t mode = r.u8();
  if (mode != 1) throw DataError("index file is not a budgeted index");

  BudgetedIndex idx;
  uint64_t n = r.u64();
  uint32_t d = r.u32();
  idx.cfg_.delta = r.f64();
  idx.cfg_.eps = r.f64();
  idx.cfg_.L_scale = r.f64();
  idx.cfg_.seed = r.u64();
  idx.costs_.resize(d);
  for (double& c : idx.costs_) c = r.f64();
  uint64_t num_proj = r.u64();
  idx.projections_.resize(num_proj);
  for (Projection& proj : idx.projections_) proj = Projection::load(r);
  idx.cfg_.backend = AnnBackendSpec::load(r);
  idx.points_.assign(n, Point(d));
  for (Point& pt : idx.points_) {
    r.raw(pt.data(), pt.size() * sizeof(double));
  }
  idx.strip_and_derive();
  idx.build_backends();
  return idx;
}

}  // namespace rann
