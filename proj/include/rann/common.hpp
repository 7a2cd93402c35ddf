#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace rann {

/// A dense point. All points of one dataset share the same length; Hamming
/// datasets use the packed representation in bits.hpp instead.
using Point = std::vector<double>;

/// Invalid arguments or parameter combinations (CLI exit code 1).
struct ParamError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent data and files (CLI exit code 2).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void check_finite(const Point& pt) {
  for (double v : pt) {
    if (!std::isfinite(v)) throw DataError("non-finite coordinate in point");
  }
}

/// Ingestion check: non-empty, rectangular, finite.
inline void check_dataset(const std::vector<Point>& points) {
  if (points.empty()) throw ParamError("dataset must be non-empty");
  const size_t d = points.front().size();
  for (const Point& pt : points) {
    if (pt.size() != d) throw DataError("inconsistent dimensions in dataset");
    check_finite(pt);
  }
}

}  // namespace rann
