#include "rann/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace rann {

namespace {

double pow_abs(double v, double p) {
  if (p == 1.0) return std::abs(v);
  if (p == 2.0) return v * v;
  return std::pow(std::abs(v), p);
}

double finish_norm(double sum, double p) {
  if (p == 1.0) return sum;
  if (p == 2.0) return std::sqrt(sum);
  return std::pow(sum, 1.0 / p);
}

void check_p(double p) {
  if (!(p > 0.0)) throw ParamError("norm exponent p must be positive");
}

}  // namespace

double lp_norm(const Point& pt, double p) {
  check_p(p);
  double sum = 0.0;
  for (double v : pt) sum += pow_abs(v, p);
  return finish_norm(sum, p);
}

double lp_distance(const Point& a, const Point& b, double p) {
  if (a.size() != b.size()) throw ParamError("dimension mismatch");
  check_p(p);
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) sum += pow_abs(a[i] - b[i], p);
  return finish_norm(sum, p);
}

double tail_norm(const Point& pt, int k, double p) {
  check_p(p);
  const int d = static_cast<int>(pt.size());
  if (k < 0 || k > d) throw ParamError("tail parameter k must be in [0, d]");
  if (k == d) return 0.0;
  if (k == 0) return lp_norm(pt, p);

  std::vector<double> mags(pt.size());
  for (size_t i = 0; i < pt.size(); ++i) mags[i] = std::abs(pt[i]);
  std::nth_element(mags.begin(), mags.begin() + k, mags.end(),
                   std::greater<double>());
  double sum = 0.0;
  for (int i = k; i < d; ++i) sum += pow_abs(mags[i], p);
  return finish_norm(sum, p);
}

Point diff(const Point& a, const Point& b) {
  if (a.size() != b.size()) throw ParamError("dimension mismatch");
  Point out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

double robust_distance(const Point& a, const Point& b, int k, double p) {
  return tail_norm(diff(a, b), k, p);
}

std::pair<int, double> robust_nn_bruteforce(const std::vector<Point>& points,
                                            const Point& q,
                                            const NormParams& params) {
  if (points.empty()) throw ParamError("dataset must be non-empty");
  int best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < points.size(); ++i) {
    double dist = robust_distance(points[i], q, params.k, params.p);
    if (dist < best_dist) {
      best_dist = dist;
      best = static_cast<int>(i);
    }
  }
  return {best, best_dist};
}

Point remove_coords(const Point& pt, const std::vector<int>& drop) {
  std::vector<bool> dead(pt.size(), false);
  for (int idx : drop) {
    if (idx < 0 || idx >= static_cast<int>(pt.size())) {
      throw ParamError("coordinate index out of range");
    }
    dead[idx] = true;
  }
  Point out;
  out.reserve(pt.size());
  for (size_t i = 0; i < pt.size(); ++i) {
    if (!dead[i]) out.push_back(pt[i]);
  }
  return out;
}

double truncated_norm(const Point& pt, double psi, double p) {
  check_p(p);
  if (psi < 0.0) throw ParamError("truncation threshold psi must be >= 0");
  double sum = 0.0;
  for (double v : pt) sum += pow_abs(std::min(std::abs(v), psi), p);
  return finish_norm(sum, p);
}

bool is_light(const Point& pt, const LightHeavyParams& lh, double p) {
  return truncated_norm(pt, lh.psi, p) <= lh.level;
}

}  // namespace rann
