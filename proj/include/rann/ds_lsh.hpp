#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "rann/bits.hpp"
#include "rann/common.hpp"
#include "rann/io.hpp"

namespace rann {

struct DsLshConfig {
  int r = 1;            // radius parameter of the near-neighbor decision
  double eps = 0.5;     // approximation slack; NEAR answers are <= (1+eps)r
  double alpha = 8.0;   // table-count constant
  double c3 = 3.0;      // escalation threshold constant, must exceed e
  uint64_t seed = 0;
  int dup_factor = 0;   // 0 = duplicate automatically when r <= ln n
  bool sample_early_exit = false;  // probe one random list element per table
};

/// Probability that two points at Hamming distance ell agree on a level-i
/// sampled coordinate subset: (1 - 1/r)^(ell * i).
double collision_probability(int r, long long ell, int i);

class Rng;

/// Samples the coordinate subset of one level-i projection as a packed mask
/// over d source coordinates. r_dup and dup describe the (virtually)
/// duplicated space; dup = 1 means no duplication.
std::vector<uint64_t> sample_level_mask(int d, long long r_dup, int i, int dup,
                                        Rng& rng);

struct DsLshStats {
  int stop_level = 0;
  std::vector<long long> collisions;  // X_i for each visited level
  long long scanned = 0;              // distinct points whose distance was computed
  bool block_scan = false;
  long long bad_scanned = 0;          // block-scan points beyond (1+eps)r
  int blocks_scanned = 0;
  int block_size = 0;                 // projections per block at the last level
  std::vector<long long> block_collisions;  // per block, unsorted
  bool early_exit = false;
};

struct DsLshResult {
  bool near = false;
  int witness = -1;        // valid when any point was scanned
  long long distance = -1; // Hamming distance of the witness
  DsLshStats stats;
};

/// Data-sensitive near-neighbor structure on the Hamming cube: levels of
/// increasingly selective coordinate-subset hash families. A query walks up
/// the levels until its collision count drops under the threshold, so easy
/// queries stop early (and then the witness is the exact nearest neighbor);
/// the last level scans its lists in blocks sorted by collision count.
class DsLshIndex {
 public:
  static DsLshIndex build(const BitMatrix& points, DsLshConfig cfg);

  DsLshResult query(const std::vector<uint64_t>& q_row) const;

  int levels() const { return static_cast<int>(tables_.size()); }
  int tables_at(int level) const {  // level is 1-based
    return static_cast<int>(tables_[level - 1].size());
  }
  int dup() const { return dup_; }
  const DsLshConfig& config() const { return cfg_; }
  const BitMatrix& points() const { return data_; }
  double near_threshold() const { return (1.0 + cfg_.eps) * cfg_.r; }

  void save(BinWriter& w) const;
  static DsLshIndex load(BinReader& r);

  /// Diagnostic access to one table (level is 1-based).
  const std::vector<uint64_t>& mask_at(int level, int table) const {
    return tables_[level - 1][table].mask;
  }
  std::vector<int> collision_list(int level, int table,
                                  const std::vector<uint64_t>& q_row) const;

 private:
  struct Table {
    std::vector<uint64_t> mask;  // sampled coordinate subset, original space
    std::unordered_map<uint64_t, std::vector<uint32_t>> buckets;
  };

  DsLshIndex() = default;
  void derive(int n);
  void sample_masks();
  void fill_buckets();
  uint64_t masked_hash(const Table& t, const uint64_t* row) const;

  DsLshConfig cfg_;
  int dup_ = 1;
  long long r_dup_ = 1;  // radius after coordinate duplication
  BitMatrix data_;
  std::vector<std::vector<Table>> tables_;  // [level-1][table]
};

/// Smallest density value making sum_i exp(-density * dist_i / r) <= 1;
/// +infinity when a point coincides with the query. Diagnostic only.
double density_parameter(const BitMatrix& points,
                         const std::vector<uint64_t>& q_row, int r);

}  // namespace rann
