#include "rann/robust_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "rann/parallel.hpp"

namespace rann {

namespace {

void check_config(const RobustIndexConfig& cfg) {
  if (cfg.k < 0) throw ParamError("k must be >= 0");
  if (!(cfg.p > 0.0)) throw ParamError("p must be positive");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) {
    throw ParamError("delta must be in (0, 1)");
  }
  if (cfg.mode == RobustMode::EpsApprox && !(cfg.eps > 0.0 && cfg.eps < 1.0)) {
    throw ParamError("eps must be in (0, 1) for the eps-approx mode");
  }
  if (!(cfg.L_scale > 0.0)) throw ParamError("L_scale must be positive");
}

}  // namespace

RobustDerived derive_robust_params(const RobustIndexConfig& cfg, int n) {
  check_config(cfg);
  if (n < 1) throw ParamError("dataset must be non-empty");
  RobustDerived d;
  d.blocks_const = cfg.mode == RobustMode::EpsApprox
                       ? 512.0 / (cfg.eps * cfg.eps)
                       : 16.0;
  d.coord_const = d.blocks_const / cfg.delta;
  const double log_n = std::log(std::max(2, n));
  if (cfg.k == 0) {
    // Degenerates to plain ANN: identity projections, nothing to sample.
    d.include_prob = 1.0;
    d.num_blocks = 1;
  } else {
    d.include_prob = 1.0 / (d.coord_const * cfg.k);
    d.num_blocks = std::max(1, static_cast<int>(std::ceil(d.blocks_const * log_n)));
  }
  double l = cfg.L_scale * std::pow(double(n), cfg.delta) * log_n;
  if (cfg.mode == RobustMode::EpsApprox) l /= cfg.eps;
  d.num_substructures = std::max(1, static_cast<int>(std::ceil(l)));
  d.lambda = std::max(128.0 / cfg.delta, 16.0 * cfg.backend.c);
  d.xi = cfg.k > 0 ? std::pow(cfg.eps, 5) * cfg.delta / (90.0 * 512.0 * cfg.k)
                   : 0.0;
  return d;
}

RobustIndex RobustIndex::build(std::vector<Point> points,
                               RobustIndexConfig cfg) {
  check_dataset(points);
  check_config(cfg);
  if (cfg.k > static_cast<int>(points.front().size())) {
    throw ParamError("k must be <= dimension");
  }
  if (cfg.mode == RobustMode::EpsApprox &&
      cfg.backend.kind != BackendKind::ExactScan &&
      cfg.backend.c > 1.0 + cfg.eps / 64.0) {
    throw ParamError("eps-approx mode needs a (1+eps/64)-quality backend");
  }
  cfg.backend.p = cfg.p;

  RobustIndex idx;
  idx.cfg_ = cfg;
  idx.derived_ = derive_robust_params(cfg, static_cast<int>(points.size()));
  idx.points_ = std::move(points);

  const uint32_t d = static_cast<uint32_t>(idx.points_.front().size());
  idx.projections_.resize(idx.derived_.num_substructures);
  for (int j = 0; j < idx.derived_.num_substructures; ++j) {
    SamplingConfig sc{idx.derived_.include_prob, idx.derived_.num_blocks,
                      cfg.seed, static_cast<uint64_t>(j + 1)};
    idx.projections_[j] = sample_projection(d, sc);
  }
  idx.build_backends();
  return idx;
}

void RobustIndex::build_backends() {
  backends_.resize(projections_.size());
  parallel_for(projections_.size(), [&](size_t j) {
    std::vector<Point> projected;
    projected.reserve(points_.size());
    for (const Point& pt : points_) {
      projected.push_back(projections_[j].apply(pt, cfg_.p));
    }
    AnnBackendSpec spec = cfg_.backend;
    spec.seed = cfg_.seed ^ (0x9e3779b97f4a7c15ULL * (j + 1));
    backends_[j] = build_backend(projected, spec);
  });
}

RobustQueryResult RobustIndex::query(const Point& q) const {
  if (q.size() != points_.front().size()) {
    throw ParamError("query dimension mismatch");
  }
  const size_t L = backends_.size();
  RobustQueryResult result;
  result.stats.resize(L);
  parallel_for(L, [&](size_t j) {
    Point qj = projections_[j].apply(q, cfg_.p);
    AnnResult r = backends_[j]->query(qj);
    result.stats[j] = {r.index, r.distance, r.fallback};
  });

  // Re-rank the distinct candidates by exact robust distance.
  std::unordered_map<int, double> robust;
  robust.reserve(L);
  result.robust_distance = std::numeric_limits<double>::infinity();
  for (const SubQueryStat& s : result.stats) {
    if (s.candidate < 0) continue;
    auto [it, fresh] = robust.try_emplace(s.candidate, 0.0);
    if (fresh) {
      it->second = robust_distance(points_[s.candidate], q, cfg_.k, cfg_.p);
    }
    double dist = it->second;
    if (dist < result.robust_distance ||
        (dist == result.robust_distance && s.candidate < result.index)) {
      result.robust_distance = dist;
      result.index = s.candidate;
    }
  }
  return result;
}

void RobustIndex::save(BinWriter& w) const {
  // header (magic, version, n, d, config), then projections, then the
  // backend blob, then the dataset kept for re-ranking
  w.raw("RIDX", 4);
  w.u32(1);  // index format version
  w.u8(0);   // mode tag: robust
  w.u64(points_.size());
  w.u32(static_cast<uint32_t>(points_.front().size()));
  w.u32(static_cast<uint32_t>(cfg_.k));
  w.f64(cfg_.p);
  w.f64(cfg_.delta);
  w.u8(static_cast<uint8_t>(cfg_.mode));
  w.f64(cfg_.eps);
  w.f64(cfg_.L_scale);
  w.u64(cfg_.seed);
  w.u64(projections_.size());
  for (const Projection& proj : projections_) proj.save(w);
  cfg_.backend.save(w);
  for (const Point& pt : points_) {
    w.raw(pt.data(), pt.size() * sizeof(double));
  }
}

RobustIndex RobustIndex::load(BinReader& r) {
  char magic[4];
  r.raw(magic, 4);
  if (std::string(magic, 4) != "RIDX") throw DataError("not an index file");
  uint32_t version = r.u32();
  if (version != 1) {
    throw DataError("unsupported index version " + std::to_string(version));
  }
  uint8_t mode = r.u8();
  if (mode != 0) throw DataError("index file is not a robust index");

  RobustIndex idx;
  uint64_t n = r.u64();
  uint32_t d = r.u32();
  idx.cfg_.k = static_cast<int>(r.u32());
  idx.cfg_.p = r.f64();
  idx.cfg_.delta = r.f64();
  idx.cfg_.mode = static_cast<RobustMode>(r.u8());
  idx.cfg_.eps = r.f64();
  idx.cfg_.L_scale = r.f64();
  idx.cfg_.seed = r.u64();
  uint64_t num_proj = r.u64();
  idx.projections_.resize(num_proj);
  for (Projection& proj : idx.projections_) proj = Projection::load(r);
  idx.cfg_.backend = AnnBackendSpec::load(r);
  idx.points_.assign(n, Point(d));
  for (Point& pt : idx.points_) {
    r.raw(pt.data(), pt.size() * sizeof(double));
  }
  idx.derived_ = derive_robust_params(idx.cfg_, static_cast<int>(n));
  idx.build_backends();
  return idx;
}

}  // namespace rann
