#include "rann/ds_lsh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rann/parallel.hpp"
#include "rann/rng.hpp"

namespace rann {

double collision_probability(int r, long long ell, int i) {
  if (r < 1) throw ParamError("radius must be >= 1");
  if (ell < 0 || i < 1) throw ParamError("bad collision probability arguments");
  return std::pow(1.0 - 1.0 / r, double(ell) * i);
}

namespace {

uint64_t word_hash(uint64_t h, uint64_t w) {
  h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h *= 0xff51afd7ed558ccdULL;
  return h ^ (h >> 33);
}

}  // namespace

std::vector<uint64_t> sample_level_mask(int d, long long r_dup, int i, int dup,
                                        Rng& rng) {
  const double include =
      1.0 - std::pow(1.0 - 1.0 / double(r_dup), double(i) * dup);
  std::vector<uint64_t> mask((d + 63) / 64, 0);
  for (int j = 0; j < d; ++j) {
    if (rng.bernoulli(include)) mask[j >> 6] |= 1ULL << (j & 63);
  }
  return mask;
}

void DsLshIndex::derive(int n) {
  if (n < 2) throw ParamError("need at least two points");
  if (cfg_.r < 1) throw ParamError("radius must be >= 1");
  if (!(cfg_.eps > 0.0)) throw ParamError("eps must be positive");
  if (!(cfg_.c3 > std::exp(1.0))) {
    throw ParamError("escalation constant c3 must exceed e");
  }
  if (!(cfg_.alpha > 0.0)) throw ParamError("alpha must be positive");
  const double log_n = std::log(double(n));
  if (cfg_.dup_factor > 0) {
    dup_ = cfg_.dup_factor;
    if (double(cfg_.r) * dup_ <= log_n) {
      throw ParamError("dup_factor too small: need r * dup > ln n");
    }
  } else if (cfg_.r <= log_n) {
    // Duplicating every coordinate scales all distances by dup_, pushing the
    // working radius above ln n. Queries see the same duplication, which we
    // realize by folding dup_ into the sampling exponent instead of
    // materializing the copies.
    dup_ = static_cast<int>(std::ceil((log_n + 1.0) / cfg_.r));
  } else {
    dup_ = 1;
  }
  r_dup_ = static_cast<long long>(cfg_.r) * dup_;

  int levels = std::max(1, static_cast<int>(std::floor(log_n / (1.0 + cfg_.eps))));
  tables_.resize(levels);
  for (int i = 1; i <= levels; ++i) {
    double cp_at_r = std::pow(1.0 - 1.0 / double(r_dup_), double(r_dup_) * i);
    int count = std::max(
        1, static_cast<int>(std::ceil(cfg_.alpha * log_n / cp_at_r)));
    tables_[i - 1].resize(count);
  }
}

void DsLshIndex::sample_masks() {
  const int d = data_.d;
  for (int i = 1; i <= levels(); ++i) {
    // A level-i projection in the duplicated space keeps a copy with
    // probability 1-(1-1/r')^i; a source coordinate survives if any of its
    // dup_ copies does, so duplication folds into the sampling exponent.
    auto& level = tables_[i - 1];
    parallel_for(level.size(), [&](size_t t) {
      Rng rng(cfg_.seed, (uint64_t(i) << 32) | uint64_t(t));
      level[t].mask = sample_level_mask(d, r_dup_, i, dup_, rng);
    });
  }
}

void DsLshIndex::fill_buckets() {
  for (auto& level : tables_) {
    parallel_for(level.size(), [&](size_t t) {
      Table& table = level[t];
      table.buckets.clear();
      for (int idx = 0; idx < data_.n; ++idx) {
        table.buckets[masked_hash(table, data_.row(idx))].push_back(
            static_cast<uint32_t>(idx));
      }
    });
  }
}

uint64_t DsLshIndex::masked_hash(const Table& t, const uint64_t* row) const {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (size_t w = 0; w < data_.stride; ++w) {
    h = word_hash(h, row[w] & t.mask[w]);
  }
  return h;
}

DsLshIndex DsLshIndex::build(const BitMatrix& points, DsLshConfig cfg) {
  DsLshIndex idx;
  idx.cfg_ = cfg;
  idx.data_ = points;
  idx.derive(points.n);
  idx.sample_masks();
  idx.fill_buckets();
  return idx;
}

std::vector<int> DsLshIndex::collision_list(
    int level, int table, const std::vector<uint64_t>& q_row) const {
  const Table& t = tables_[level - 1][table];
  auto it = t.buckets.find(masked_hash(t, q_row.data()));
  if (it == t.buckets.end()) return {};
  return std::vector<int>(it->second.begin(), it->second.end());
}

DsLshResult DsLshIndex::query(const std::vector<uint64_t>& q_row) const {
  if (q_row.size() != data_.stride) throw ParamError("query dimension mismatch");
  const double thresh = near_threshold();
  DsLshResult res;
  std::vector<char> seen(data_.n, 0);

  auto scan_point = [&](uint32_t idx) {
    if (seen[idx]) return;
    seen[idx] = 1;
    ++res.stats.scanned;
    long long dist = hamming_distance(data_.row(idx), q_row.data(), data_.stride);
    if (res.witness < 0 || dist < res.distance ||
        (dist == res.distance && int(idx) < res.witness)) {
      res.witness = static_cast<int>(idx);
      res.distance = dist;
    }
  };

  const int n_levels = levels();
  std::vector<uint64_t> hashes;
  for (int i = 1; i <= n_levels; ++i) {
    const auto& level = tables_[i - 1];
    hashes.resize(level.size());
    long long collisions = 0;
    for (size_t t = 0; t < level.size(); ++t) {
      hashes[t] = masked_hash(level[t], q_row.data());
      auto it = level[t].buckets.find(hashes[t]);
      if (it == level[t].buckets.end()) continue;
      collisions += static_cast<long long>(it->second.size());
      if (cfg_.sample_early_exit && !it->second.empty()) {
        Rng rng(cfg_.seed ^ hashes[t], (uint64_t(i) << 40) | t);
        uint32_t idx = it->second[rng.next_below(it->second.size())];
        long long dist =
            hamming_distance(data_.row(idx), q_row.data(), data_.stride);
        if (dist <= thresh) {
          scan_point(idx);
          res.stats.collisions.push_back(collisions);
          res.stats.stop_level = i;
          res.stats.early_exit = true;
          res.near = true;
          return res;
        }
      }
    }
    res.stats.collisions.push_back(collisions);
    res.stats.stop_level = i;

    const double threshold = cfg_.c3 * static_cast<double>(level.size());
    if (i < n_levels) {
      if (collisions > threshold) continue;  // too crowded, escalate
      for (size_t t = 0; t < level.size(); ++t) {
        auto it = level[t].buckets.find(hashes[t]);
        if (it == level[t].buckets.end()) continue;
        for (uint32_t idx : it->second) scan_point(idx);
      }
      res.near = res.witness >= 0 && res.distance <= thresh;
      return res;
    }

    // Last level: scan blocks of projections in increasing collision order,
    // stopping at the first point within (1+eps)r.
    res.stats.block_scan = true;
    double cp_at_r =
        std::pow(1.0 - 1.0 / double(r_dup_), double(r_dup_) * n_levels);
    const int block_size =
        std::max(1, static_cast<int>(std::llround(1.0 / cp_at_r)));
    res.stats.block_size = block_size;
    const int num_blocks =
        static_cast<int>((level.size() + block_size - 1) / block_size);
    std::vector<long long> block_coll(num_blocks, 0);
    for (size_t t = 0; t < level.size(); ++t) {
      auto it = level[t].buckets.find(hashes[t]);
      if (it != level[t].buckets.end()) {
        block_coll[t / block_size] += static_cast<long long>(it->second.size());
      }
    }
    res.stats.block_collisions = block_coll;
    std::vector<int> order(num_blocks);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
      return block_coll[x] < block_coll[y];
    });

    for (int b : order) {
      ++res.stats.blocks_scanned;
      size_t t0 = static_cast<size_t>(b) * block_size;
      size_t t1 = std::min(level.size(), t0 + block_size);
      for (size_t t = t0; t < t1; ++t) {
        auto it = level[t].buckets.find(hashes[t]);
        if (it == level[t].buckets.end()) continue;
        for (uint32_t idx : it->second) {
          if (seen[idx]) continue;
          seen[idx] = 1;
          ++res.stats.scanned;
          long long dist =
              hamming_distance(data_.row(idx), q_row.data(), data_.stride);
          if (res.witness < 0 || dist < res.distance ||
              (dist == res.distance && int(idx) < res.witness)) {
            res.witness = static_cast<int>(idx);
            res.distance = dist;
          }
          if (dist <= thresh) {
            res.near = true;
            return res;
          }
          ++res.stats.bad_scanned;
        }
      }
    }
    res.near = res.witness >= 0 && res.distance <= thresh;
    return res;
  }
  return res;  // unreachable; at least one level always exists
}

void DsLshIndex::save(BinWriter& w) const {
  w.raw("RIDX", 4);
  w.u32(1);
  w.u8(2);  // mode tag: ds-lsh
  w.u32(static_cast<uint32_t>(cfg_.r));
  w.f64(cfg_.eps);
  w.f64(cfg_.alpha);
  w.f64(cfg_.c3);
  w.u64(cfg_.seed);
  w.u32(static_cast<uint32_t>(cfg_.dup_factor));
  w.u8(cfg_.sample_early_exit ? 1 : 0);
  w.u64(static_cast<uint64_t>(data_.n));
  w.u32(static_cast<uint32_t>(data_.d));
  w.raw(data_.words.data(), data_.words.size() * sizeof(uint64_t));
  w.u32(static_cast<uint32_t>(levels()));
  for (const auto& level : tables_) {
    w.u32(static_cast<uint32_t>(level.size()));
    for (const Table& t : level) {
      w.raw(t.mask.data(), t.mask.size() * sizeof(uint64_t));
    }
  }
}

DsLshIndex DsLshIndex::load(BinReader& r) {
  char magic[4];
  r.raw(magic, 4);
  if (std::string(magic, 4) != "RIDX") throw DataError("not an index file");
  uint32_t version = r.u32();
  if (version != 1) {
    throw DataError("unsupported index version " + std::to_string(version));
  }
  uint8_t mode = r.u8();
  if (mode != 2) throw DataError("index file is not a ds-lsh index");

  DsLshIndex idx;
  idx.cfg_.r = static_cast<int>(r.u32());
  idx.cfg_.eps = r.f64();
  idx.cfg_.alpha = r.f64();
  idx.cfg_.c3 = r.f64();
  idx.cfg_.seed = r.u64();
  idx.cfg_.dup_factor = static_cast<int>(r.u32());
  idx.cfg_.sample_early_exit = r.u8() != 0;
  uint64_t n = r.u64();
  uint32_t d = r.u32();
  idx.data_ = BitMatrix::zeros(static_cast<int>(n), static_cast<int>(d));
  r.raw(idx.data_.words.data(), idx.data_.words.size() * sizeof(uint64_t));
  idx.derive(static_cast<int>(n));
  uint32_t levels = r.u32();
  if (levels != idx.tables_.size()) throw DataError("corrupt ds-lsh index");
  for (auto& level : idx.tables_) {
    uint32_t count = r.u32();
    if (count != level.size()) throw DataError("corrupt ds-lsh index");
    for (Table& t : level) {
      t.mask.resize(idx.data_.stride);
      r.raw(t.mask.data(), t.mask.size() * sizeof(uint64_t));
    }
  }
  idx.fill_buckets();
  return idx;
}

double density_parameter(const BitMatrix& points,
                         const std::vector<uint64_t>& q_row, int r) {
  if (r < 1) throw ParamError("radius must be >= 1");
  if (q_row.size() != points.stride) throw ParamError("dimension mismatch");
  std::vector<double> scaled;
  scaled.reserve(points.n);
  for (int i = 0; i < points.n; ++i) {
    long long dist = hamming_distance(points.row(i), q_row.data(), points.stride);
    if (dist == 0) return std::numeric_limits<double>::infinity();
    scaled.push_back(double(dist) / r);
  }
  auto total = [&](double density) {
    double sum = 0.0;
    for (double s : scaled) sum += std::exp(-density * s);
    return sum;
  };
  if (total(0.0) <= 1.0) return 0.0;
  double hi = 1.0;
  while (total(hi) > 1.0) {
    hi *= 2.0;
    if (hi > 1e12) return std::numeric_limits<double>::infinity();
  }
  double lo = hi / 2.0;
  if (hi == 1.0) lo = 0.0;
  while (hi - lo > 1e-6) {
    double mid = 0.5 * (lo + hi);
    if (total(mid) <= 1.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace rann
