#pragma once

#include <utility>

#include "rann/common.hpp"

namespace rann {

/// L_p exponent plus the number of coordinates a robust distance may drop.
struct NormParams {
  double p = 1.0;
  int k = 0;
};

/// Truncation threshold and norm level for the light/heavy classification.
struct LightHeavyParams {
  double psi = 0.0;
  double level = 0.0;
};

double lp_norm(const Point& pt, double p);

double lp_distance(const Point& a, const Point& b, double p);

/// L_p norm of pt after zeroing its k largest-magnitude coordinates.
/// Selection-based, O(d).
double tail_norm(const Point& pt, int k, double p);

Point diff(const Point& a, const Point& b);

/// tail_norm of a - b: distance when the k worst coordinates are ignored.
double robust_distance(const Point& a, const Point& b, int k, double p);

/// Exhaustive robust nearest neighbor over the dataset, O(d * n).
/// Ties break toward the smallest dataset index.
std::pair<int, double> robust_nn_bruteforce(const std::vector<Point>& points,
                                            const Point& q,
                                            const NormParams& params);

/// Deletes the listed coordinates, preserving the order of survivors.
Point remove_coords(const Point& pt, const std::vector<int>& drop);

/// (sum_i min(|pt_i|, psi)^p)^(1/p). An infinite psi never binds and the
/// result is the plain L_p norm.
double truncated_norm(const Point& pt, double psi, double p);

/// truncated_norm(pt, lh.psi, p) <= lh.level. At exact equality a point is
/// both light and heavy; the predicate answers for light.
bool is_light(const Point& pt, const LightHeavyParams& lh, double p);

}  // namespace rann
