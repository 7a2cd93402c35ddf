#pragma once

#include <memory>
#include <vector>

#include "rann/common.hpp"
#include "rann/io.hpp"

namespace rann {

enum class BackendKind : uint8_t { ExactScan = 0, BitSampleLsh = 1 };

/// Contract parameters for a base approximate-NN backend. c is the
/// approximation quality the caller may rely on; the exact scan always has
/// c = 1 (it is normalized on build).
struct AnnBackendSpec {
  BackendKind kind = BackendKind::ExactScan;
  double c = 1.0;
  double p = 1.0;
  int tables = 16;             // bit_sample_lsh only
  int bits_per_hash = 16;      // bit_sample_lsh only
  int discretize_buckets = 32; // threshold grid for real-valued data
  uint64_t seed = 0;

  void save(BinWriter& w) const;
  static AnnBackendSpec load(BinReader& r);
};

struct AnnResult {
  int index = -1;
  double distance = 0.0;
  bool fallback = false;  // LSH found no candidates; answered from a sample
};

/// Immutable nearest-neighbor structure over one (projected) point set.
class AnnBackend {
 public:
  virtual ~AnnBackend() = default;
  virtual AnnResult query(const Point& q) const = 0;
  virtual int size() const = 0;
  virtual const AnnBackendSpec& spec() const = 0;
};

/// Builds the structure requested by spec over a copy of points.
std::unique_ptr<AnnBackend> build_backend(const std::vector<Point>& points,
                                          const AnnBackendSpec& spec);

}  // namespace rann
