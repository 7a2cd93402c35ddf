#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "rann/core.hpp"
#include "rann/projection.hpp"

// Independent reference implementations used as oracles. They deliberately
// avoid the library's code paths: sorting instead of selection, expanded
// vectors instead of the compressed encoding, std::mt19937_64 instead of the
// library generator.
namespace oracle {

/// Sort-based tail norm: sort magnitudes descending, drop the first k.
inline double tail_norm_sorted(const rann::Point& pt, int k, double p) {
  std::vector<double> mags(pt.size());
  for (size_t i = 0; i < pt.size(); ++i) mags[i] = std::abs(pt[i]);
  std::sort(mags.begin(), mags.end(), std::greater<double>());
  double sum = 0.0;
  for (size_t i = k; i < mags.size(); ++i) sum += std::pow(mags[i], p);
  return std::pow(sum, 1.0 / p);
}

/// Double-loop exhaustive robust NN over the sorted reference.
inline std::pair<int, double> robust_nn_sorted(
    const std::vector<rann::Point>& points, const rann::Point& q, int k,
    double p) {
  int best = -1;
  double best_dist = 0.0;
  for (size_t i = 0; i < points.size(); ++i) {
    rann::Point residual(q.size());
    for (size_t j = 0; j < q.size(); ++j) residual[j] = points[i][j] - q[j];
    double dist = tail_norm_sorted(residual, k, p);
    if (best < 0 || dist < best_dist) {
      best = static_cast<int>(i);
      best_dist = dist;
    }
  }
  return {best, best_dist};
}

/// Materializes the projected point as the expanded sequence of copies.
inline std::vector<double> expand_projection(const rann::Projection& proj,
                                             const rann::Point& pt) {
  std::vector<double> out;
  for (const rann::ProjEntry& e : proj.entries) {
    for (uint32_t c = 0; c < e.count; ++c) out.push_back(e.scale * pt[e.index]);
  }
  return out;
}

inline double lp_norm_plain(const std::vector<double>& v, double p) {
  double sum = 0.0;
  for (double x : v) sum += std::pow(std::abs(x), p);
  return std::pow(sum, 1.0 / p);
}

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

inline double variance(const std::vector<double>& v) {
  double m = mean(v);
  double sum = 0.0;
  for (double x : v) sum += (x - m) * (x - m);
  return sum / (v.size() - 1);
}

inline double stderr_of_mean(const std::vector<double>& v) {
  return std::sqrt(variance(v) / v.size());
}

inline rann::Point random_point(std::mt19937_64& rng, int d, double lo = -1.0,
                                double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  rann::Point pt(d);
  for (double& v : pt) v = dist(rng);
  return pt;
}

}  // namespace oracle
