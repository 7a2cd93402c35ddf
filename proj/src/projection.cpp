#include "rann/projection.hpp"

#include <cmath>

#include "rann/rng.hpp"

namespace rann {

namespace {

double entry_weight(const ProjEntry& e, double p) {
  // count copies of scale*x contribute count * |scale*x|^p; folding the
  // multiplicity into the value keeps projected points dense and plain.
  if (e.count == 1) return e.scale;
  return std::pow(static_cast<double>(e.count), 1.0 / p) * e.scale;
}

double pow_abs(double v, double p) {
  if (p == 1.0) return std::abs(v);
  if (p == 2.0) return v * v;
  return std::pow(std::abs(v), p);
}

}  // namespace

Point Projection::apply(const Point& pt, double p) const {
  if (pt.size() != source_dim) throw ParamError("dimension mismatch");
  if (!(p > 0.0)) throw ParamError("norm exponent p must be positive");
  Point out;
  out.reserve(entries.size());
  for (const ProjEntry& e : entries) {
    out.push_back(entry_weight(e, p) * pt[e.index]);
  }
  return out;
}

void Projection::save(BinWriter& w) const {
  w.u32(source_dim);
  w.u64(entries.size());
  for (const ProjEntry& e : entries) {
    w.u32(e.index);
    w.u32(e.count);
    w.f64(e.scale);
  }
}

Projection Projection::load(BinReader& r) {
  Projection proj;
  proj.source_dim = r.u32();
  uint64_t n = r.u64();
  proj.entries.resize(n);
  for (ProjEntry& e : proj.entries) {
    e.index = r.u32();
    e.count = r.u32();
    e.scale = r.f64();
    if (e.index >= proj.source_dim || e.count == 0 || !(e.scale > 0.0)) {
      throw DataError("corrupt projection entry");
    }
  }
  return proj;
}

Projection sample_projection(uint32_t d, const SamplingConfig& cfg) {
  if (d == 0) throw ParamError("dimension must be >= 1");
  if (!(cfg.pr > 0.0 && cfg.pr <= 1.0)) {
    throw ParamError("sampling probability must be in (0, 1]");
  }
  if (cfg.t < 1) throw ParamError("block count t must be >= 1");
  Rng rng(cfg.seed, cfg.stream_id);
  Projection proj;
  proj.source_dim = d;
  for (uint32_t i = 0; i < d; ++i) {
    int count = rng.binomial(cfg.t, cfg.pr);
    if (count > 0) {
      proj.entries.push_back({i, static_cast<uint32_t>(count), 1.0});
    }
  }
  return proj;
}

Projection sample_weighted_projection(const std::vector<double>& costs,
                                      double c1, int t, uint64_t seed,
                                      uint64_t stream_id) {
  if (costs.empty()) throw ParamError("cost vector must be non-empty");
  if (!(c1 > 0.0)) throw ParamError("c1 must be positive");
  if (t < 1) throw ParamError("block count t must be >= 1");
  for (double c : costs) {
    if (!(c > 0.0 && c <= 1.0)) {
      throw ParamError("costs must be in (0, 1]; drop zero-cost coordinates");
    }
  }
  Rng rng(seed, stream_id);
  Projection proj;
  proj.source_dim = static_cast<uint32_t>(costs.size());
  for (uint32_t i = 0; i < proj.source_dim; ++i) {
    double prob = std::min(1.0, costs[i] / c1);
    int count = rng.binomial(t, prob);
    if (count > 0) {
      proj.entries.push_back({i, static_cast<uint32_t>(count), c1 / costs[i]});
    }
  }
  return proj;
}

double projected_distance(const Projection& proj, const Point& a,
                          const Point& b, double p) {
  if (a.size() != proj.source_dim || b.size() != proj.source_dim) {
    throw ParamError("dimension mismatch");
  }
  if (!(p > 0.0)) throw ParamError("norm exponent p must be positive");
  double sum = 0.0;
  for (const ProjEntry& e : proj.entries) {
    double v = e.scale * (a[e.index] - b[e.index]);
    sum += e.count * pow_abs(v, p);
  }
  if (p == 1.0) return sum;
  if (p == 2.0) return std::sqrt(sum);
  return std::pow(sum, 1.0 / p);
}

}  // namespace rann
