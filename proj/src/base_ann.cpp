#include "rann/base_ann.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <unordered_map>

#include "rann/core.hpp"
#include "rann/rng.hpp"

namespace rann {

void AnnBackendSpec::save(BinWriter& w) const {
  w.raw("RABK", 4);
  w.u32(1);  // backend format version
  w.u8(static_cast<uint8_t>(kind));
  w.f64(c);
  w.f64(p);
  w.u32(static_cast<uint32_t>(tables));
  w.u32(static_cast<uint32_t>(bits_per_hash));
  w.u32(static_cast<uint32_t>(discretize_buckets));
  w.u64(seed);
}

AnnBackendSpec AnnBackendSpec::load(BinReader& r) {
  char magic[4];
  r.raw(magic, 4);
  if (std::string(magic, 4) != "RABK") throw DataError("bad backend magic");
  uint32_t version = r.u32();
  if (version != 1) {
    throw DataError("unsupported backend version " + std::to_string(version));
  }
  AnnBackendSpec spec;
  spec.kind = static_cast<BackendKind>(r.u8());
  spec.c = r.f64();
  spec.p = r.f64();
  spec.tables = static_cast<int>(r.u32());
  spec.bits_per_hash = static_cast<int>(r.u32());
  spec.discretize_buckets = static_cast<int>(r.u32());
  spec.seed = r.u64();
  return spec;
}

namespace {

class ExactScanBackend final : public AnnBackend {
 public:
  ExactScanBackend(std::vector<Point> points, AnnBackendSpec spec)
      : points_(std::move(points)), spec_(spec) {
    spec_.c = 1.0;  // the scan is exact by construction
  }

  AnnResult query(const Point& q) const override {
    if (!points_.empty() && q.size() != points_.front().size()) {
      throw ParamError("query dimension mismatch");
    }
    AnnResult best;
    best.distance = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < points_.size(); ++i) {
      double dist = lp_distance(points_[i], q, spec_.p);
      if (dist < best.distance) {
        best.distance = dist;
        best.index = static_cast<int>(i);
      }
    }
    return best;
  }

  int size() const override { return static_cast<int>(points_.size()); }
  const AnnBackendSpec& spec() const override { return spec_; }

 private:
  std::vector<Point> points_;
  AnnBackendSpec spec_;
};

/// Bit-sampling LSH. Each hash bit tests one coordinate against a threshold
/// drawn from a discretized per-coordinate range, which reduces to plain bit
/// sampling on {0,1} data and to a unary-embedding sample for real L1 data.
class BitSampleLshBackend final : public AnnBackend {
 public:
  BitSampleLshBackend(std::vector<Point> points, AnnBackendSpec spec)
      : points_(std::move(points)), spec_(spec) {
    if (spec_.tables < 1) throw ParamError("LSH needs at least one table");
    if (spec_.bits_per_hash < 1 || spec_.bits_per_hash > 64) {
      throw ParamError("bits_per_hash must be in [1, 64]");
    }
    if (spec_.discretize_buckets < 2) {
      throw ParamError("discretize_buckets must be >= 2");
    }
    const size_t d = points_.front().size();
    if (d == 0) throw ParamError("points must have at least one coordinate");

    std::vector<double> lo(d, std::numeric_limits<double>::infinity());
    std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
    for (const Point& pt : points_) {
      for (size_t j = 0; j < d; ++j) {
        lo[j] = std::min(lo[j], pt[j]);
        hi[j] = std::max(hi[j], pt[j]);
      }
    }

    Rng rng(spec_.seed, 0x62697473ULL);
    bits_.resize(spec_.tables);
    tables_.resize(spec_.tables);
    for (int t = 0; t < spec_.tables; ++t) {
      bits_[t].resize(spec_.bits_per_hash);
      for (Bit& bit : bits_[t]) {
        bit.coord = static_cast<uint32_t>(rng.next_below(d));
        // threshold strictly inside the range, on the bucket grid
        int bucket = 1 + static_cast<int>(
                             rng.next_below(spec_.discretize_buckets - 1));
        double span = hi[bit.coord] - lo[bit.coord];
        bit.threshold =
            lo[bit.coord] + span * bucket / spec_.discretize_buckets;
      }
      for (size_t i = 0; i < points_.size(); ++i) {
        tables_[t][key(points_[i], t)].push_back(static_cast<int>(i));
      }
    }
  }

  AnnResult query(const Point& q) const override {
    if (q.size() != points_.front().size()) {
      throw ParamError("query dimension mismatch");
    }
    AnnResult best;
    best.distance = std::numeric_limits<double>::infinity();
    std::vector<char> seen(points_.size(), 0);
    for (int t = 0; t < spec_.tables; ++t) {
      auto it = tables_[t].find(key(q, t));
      if (it == tables_[t].end()) continue;
      for (int idx : it->second) {
        if (seen[idx]) continue;
        seen[idx] = 1;
        double dist = lp_distance(points_[idx], q, spec_.p);
        if (dist < best.distance) {
          best.distance = dist;
          best.index = idx;
        }
      }
    }
    if (best.index < 0) {
      // No collisions anywhere: answer from a deterministic random sample
      // of about sqrt(n) points and flag the result.
      best.fallback = true;
      size_t n = points_.size();
      size_t m = std::max<size_t>(1, static_cast<size_t>(std::ceil(
                                         std::sqrt(double(n)))));
      Rng rng(spec_.seed ^ fingerprint(q), 0x66616c6cULL);
      for (size_t s = 0; s < m; ++s) {
        int idx = static_cast<int>(rng.next_below(n));
        double dist = lp_distance(points_[idx], q, spec_.p);
        if (dist < best.distance) {
          best.distance = dist;
          best.index = idx;
        }
      }
    }
    return best;
  }

  int size() const override { return static_cast<int>(points_.size()); }
  const AnnBackendSpec& spec() const override { return spec_; }

 private:
  struct Bit {
    uint32_t coord = 0;
    double threshold = 0.0;
  };

  uint64_t key(const Point& pt, int table) const {
    uint64_t k = 0;
    const auto& bits = bits_[table];
    for (size_t b = 0; b < bits.size(); ++b) {
      if (pt[bits[b].coord] > bits[b].threshold) k |= (1ULL << b);
    }
    return k;
  }

  static uint64_t fingerprint(const Point& q) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (double v : q) {
      uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      h = (h ^ bits) * 0x100000001b3ULL;
    }
    return h;
  }

  std::vector<Point> points_;
  AnnBackendSpec spec_;
  std::vector<std::vector<Bit>> bits_;
  std::vector<std::unordered_map<uint64_t, std::vector<int>>> tables_;
};

}  // namespace

std::unique_ptr<AnnBackend> build_backend(const std::vector<Point>& points,
                                          const AnnBackendSpec& spec) {
  check_dataset(points);
  if (spec.c < 1.0) throw ParamError("approximation factor c must be >= 1");
  switch (spec.kind) {
    case BackendKind::ExactScan:
      return std::make_unique<ExactScanBackend>(points, spec);
    case BackendKind::BitSampleLsh:
      return std::make_unique<BitSampleLshBackend>(points, spec);
  }
  throw ParamError("unknown backend kind");
}

}  // namespace rann
