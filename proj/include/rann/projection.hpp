#pragma once

#include <cstdint>
#include <vector>

#include "rann/common.hpp"
#include "rann/io.hpp"

namespace rann {

/// One sampled coordinate of a projection: the source index, how many times
/// it is copied, and the scale applied to every copy.
struct ProjEntry {
  uint32_t index = 0;
  uint32_t count = 1;
  double scale = 1.0;

  bool operator==(const ProjEntry&) const = default;
};

/// A restricted projection matrix in compressed form. Each row of the
/// logical matrix copies (and optionally scales) one source coordinate;
/// since coordinate order never matters for norms, we store only the
/// per-coordinate multiplicities. The expanded matrix exists nowhere at
/// runtime.
struct Projection {
  uint32_t source_dim = 0;
  std::vector<ProjEntry> entries;  // sorted by index

  uint64_t projected_dim() const {
    uint64_t total = 0;
    for (const ProjEntry& e : entries) total += e.count;
    return total;
  }

  /// Projects pt into a dense vector with one slot per entry; multiplicity
  /// and scale fold into the emitted value as count^(1/p) * scale * x so
  /// that every L_p norm (and distance) equals that of the expanded
  /// sequence. O(|entries|).
  Point apply(const Point& pt, double p) const;

  void save(BinWriter& w) const;
  static Projection load(BinReader& r);

  bool operator==(const Projection&) const = default;
};

/// Parameters of the concatenated-block sampling distribution: each of t
/// independent blocks includes every coordinate with probability pr.
struct SamplingConfig {
  double pr = 1.0;
  int t = 1;
  uint64_t seed = 0;
  uint64_t stream_id = 0;
};

/// Samples the compressed encoding of t independent per-coordinate draws:
/// coordinate i receives multiplicity Binomial(t, pr). Deterministic given
/// (seed, stream_id).
Projection sample_projection(uint32_t d, const SamplingConfig& cfg);

/// Cost-weighted sampling: per block, coordinate i is included with
/// probability costs[i]/c1 and carries scale c1/costs[i]; multiplicities
/// accumulate over the t blocks. Zero costs are a parameter error (drop
/// those coordinates first).
Projection sample_weighted_projection(const std::vector<double>& costs,
                                      double c1, int t, uint64_t seed,
                                      uint64_t stream_id);

/// ||apply(a - b)||_p computed straight off the compressed encoding, without
/// materializing either projected point.
double projected_distance(const Projection& proj, const Point& a,
                          const Point& b, double p);

}  // namespace rann
