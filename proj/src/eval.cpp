#include "rann/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rann/ds_lsh.hpp"
#include "rann/projection.hpp"
#include "rann/rng.hpp"

namespace rann {

namespace {

std::vector<int> pick_distinct(Rng& rng, int d, int count) {
  std::vector<int> all(d);
  std::iota(all.begin(), all.end(), 0);
  for (int i = 0; i < count; ++i) {
    int j = i + static_cast<int>(rng.next_below(d - i));
    std::swap(all[i], all[j]);
  }
  all.resize(count);
  return all;
}

double sign(Rng& rng) { return rng.bernoulli(0.5) ? 1.0 : -1.0; }

}  // namespace

PlantedInstance gen_planted(int n, int d, int k, double r, double noise_mag,
                            uint64_t seed, int num_queries, double p) {
  if (n < 1 || d < 1 || num_queries < 1) throw ParamError("bad instance size");
  if (k < 0 || k >= d) throw ParamError("need 0 <= k < d");
  if (!(r > 0.0) || !(p > 0.0)) throw ParamError("r and p must be positive");
  if (num_queries > n) throw ParamError("more queries than points");
  if (k > 0 && noise_mag < 10.0 * r / k) {
    throw ParamError("noise magnitude must be at least 10 r / k");
  }
  const double clean_mag = r / std::pow(double(d - k), 1.0 / p);
  if (k > 0 && noise_mag <= 2.0 * clean_mag) {
    throw ParamError("infeasible parameters: noise below clean magnitude");
  }
  const int spread = k > 0 ? 4 * k : std::min(d, 8);
  if (spread > d) {
    throw ParamError("infeasible parameters: need 4k <= d for decoys");
  }
  const double spread_mag =
      k > 0 ? 8.0 * r / std::pow(2.0 * k, 1.0 / p) : 4.0 * r;

  Rng rng(seed, 0x706c616eULL);
  PlantedInstance inst;
  inst.n = n;
  inst.d = d;
  inst.k = k;
  inst.r = r;
  inst.noise_mag = noise_mag;
  inst.p = p;
  inst.seed = seed;
  inst.queries.resize(num_queries);
  inst.truth.resize(num_queries);
  inst.data.resize(n);

  const double span = 1000.0 * r;
  for (int qi = 0; qi < num_queries; ++qi) {
    Point& q = inst.queries[qi];
    q.resize(d);
    for (double& v : q) v = span * rng.next_double();

    QueryTruth& t = inst.truth[qi];
    t.planted = qi;
    t.r = r;
    Point planted = q;
    t.corrupted = pick_distinct(rng, d, k);
    std::sort(t.corrupted.begin(), t.corrupted.end());
    std::vector<char> corrupted_mask(d, 0);
    for (int c : t.corrupted) corrupted_mask[c] = 1;
    for (int j = 0; j < d; ++j) {
      if (corrupted_mask[j]) {
        planted[j] += sign(rng) * noise_mag;
      } else {
        planted[j] += sign(rng) * clean_mag;
      }
    }
    inst.data[qi] = std::move(planted);
  }

  // Decoys round-robin across queries: near misses that stay heavy even
  // after ignoring 2k coordinates.
  for (int i = num_queries; i < n; ++i) {
    int qi = (i - num_queries) % num_queries;
    Point decoy = inst.queries[qi];
    for (int c : pick_distinct(rng, d, spread)) {
      decoy[c] += sign(rng) * spread_mag;
    }
    double margin = robust_distance(decoy, inst.queries[qi],
                                    std::min(d, 2 * k), p);
    if (margin < 4.0 * r - 1e-9) {
      throw std::logic_error("planted generator: decoy margin violated");
    }
    inst.data[i] = std::move(decoy);
  }

  for (int qi = 0; qi < num_queries; ++qi) {
    auto [idx, dist] = robust_nn_bruteforce(inst.data, inst.queries[qi],
                                            {p, k});
    if (idx != inst.truth[qi].planted) {
      throw std::logic_error("planted generator: oracle disagrees with truth");
    }
    inst.truth[qi].r = dist;
  }
  return inst;
}

BudgetedPlantedInstance gen_planted_budgeted(int n, int d, double r,
                                             double noise_mag, uint64_t seed,
                                             int num_queries,
                                             CostProfile profile,
                                             int uniform_k,
                                             std::vector<double> file_costs) {
  if (n < 1 || d < 1 || num_queries < 1) throw ParamError("bad instance size");
  if (num_queries > n) throw ParamError("more queries than points");
  if (!(r > 0.0)) throw ParamError("r must be positive");
  if (!(noise_mag >= 10.0 * r / d)) throw ParamError("noise too small");

  Rng rng(seed, 0x62756467ULL);
  BudgetedPlantedInstance inst;
  inst.n = n;
  inst.d = d;
  inst.r = r;
  inst.noise_mag = noise_mag;
  inst.seed = seed;
  inst.costs.resize(d);
  if (profile == CostProfile::Uniform) {
    if (uniform_k < 1) throw ParamError("uniform profile needs k >= 1");
    std::fill(inst.costs.begin(), inst.costs.end(), 1.0 / uniform_k);
  } else if (profile == CostProfile::File) {
    if (static_cast<int>(file_costs.size()) != d) {
      throw ParamError("cost file length must equal the dimension");
    }
    for (double c : file_costs) {
      if (!(c >= 0.0 && c <= 1.0)) throw ParamError("costs must be in [0, 1]");
    }
    inst.costs = std::move(file_costs);
  } else {
    for (double& c : inst.costs) c = 0.05 + 0.95 * rng.next_double();
  }
  double total_cost = std::accumulate(inst.costs.begin(), inst.costs.end(), 0.0);
  if (total_cost < 3.0) {
    throw ParamError("infeasible parameters: total cost below decoy budget");
  }

  inst.queries.resize(num_queries);
  inst.truth.resize(num_queries);
  inst.data.resize(n);
  const double span = 1000.0 * r;

  for (int qi = 0; qi < num_queries; ++qi) {
    Point& q = inst.queries[qi];
    q.resize(d);
    for (double& v : q) v = span * rng.next_double();

    QueryTruth& t = inst.truth[qi];
    t.planted = qi;
    t.r = r;
    // Corrupt a random affordable set: total cost <= 1.
    std::vector<int> order = pick_distinct(rng, d, d);
    double cost_sum = 0.0;
    std::vector<char> corrupted_mask(d, 0);
    for (int c : order) {
      if (cost_sum + inst.costs[c] <= 1.0) {
        cost_sum += inst.costs[c];
        corrupted_mask[c] = 1;
        t.corrupted.push_back(c);
      }
    }
    std::sort(t.corrupted.begin(), t.corrupted.end());
    t.corrupted_cost = cost_sum;
    int clean_count = d - static_cast<int>(t.corrupted.size());
    if (clean_count < 1) throw ParamError("infeasible: budget covers all coords");
    const double clean_mag = r / clean_count;

    Point planted = q;
    for (int j = 0; j < d; ++j) {
      planted[j] += corrupted_mask[j] ? sign(rng) * noise_mag
                                      : sign(rng) * clean_mag;
    }
    inst.data[qi] = std::move(planted);
  }

  // Decoy mass proportional to cost: dropping any affordable set removes at
  // most 4r of value, so at least 4r(sum w - 1) >= 8r remains.
  for (int i = num_queries; i < n; ++i) {
    int qi = (i - num_queries) % num_queries;
    Point decoy = inst.queries[qi];
    std::vector<int> order = pick_distinct(rng, d, d);
    double cost_sum = 0.0;
    for (int c : order) {
      if (cost_sum >= 3.0) break;
      cost_sum += inst.costs[c];
      decoy[c] += sign(rng) * 4.0 * r * inst.costs[c];
    }
    if (cost_sum < 3.0) {
      throw std::logic_error("budgeted generator: decoy spread underfunded");
    }
    inst.data[i] = std::move(decoy);
  }
  return inst;
}

namespace {

void flip_bits(BitMatrix& m, int row, const std::vector<int>& coords) {
  for (int c : coords) m.set(row, c, !m.get(row, c));
}

void random_row(BitMatrix& m, int row, Rng& rng) {
  uint64_t* w = m.row(row);
  for (size_t j = 0; j < m.stride; ++j) w[j] = rng.next_u64();
  int tail = m.d & 63;
  if (tail) w[m.stride - 1] &= (1ULL << tail) - 1;
}

}  // namespace

HammingPlantedInstance gen_planted_hamming(int n, int d, int r, uint64_t seed,
                                           int num_queries) {
  if (n < 2 || d < 1 || num_queries < 1) throw ParamError("bad instance size");
  if (num_queries > n) throw ParamError("more queries than points");
  if (r < 1 || 8 * r > d) throw ParamError("need 8r <= d for decoys");

  Rng rng(seed, 0x68616d6dULL);
  HammingPlantedInstance inst;
  inst.r = r;
  inst.data = BitMatrix::zeros(n, d);
  inst.queries = BitMatrix::zeros(num_queries, d);
  inst.truth.resize(num_queries);

  for (int qi = 0; qi < num_queries; ++qi) {
    random_row(inst.queries, qi, rng);
    std::copy(inst.queries.row(qi), inst.queries.row(qi) + inst.queries.stride,
              inst.data.row(qi));
    flip_bits(inst.data, qi, pick_distinct(rng, d, r));
    inst.truth[qi].planted = qi;
    inst.truth[qi].r = r;
  }
  for (int i = num_queries; i < n; ++i) {
    int qi = (i - num_queries) % num_queries;
    std::copy(inst.queries.row(qi), inst.queries.row(qi) + inst.queries.stride,
              inst.data.row(i));
    int flips = 4 * r + static_cast<int>(rng.next_below(4 * r + 1));
    flip_bits(inst.data, i, pick_distinct(rng, d, std::min(flips, d)));
  }

  // Planted points must be the unique near neighbors.
  for (int qi = 0; qi < num_queries; ++qi) {
    for (int i = 0; i < n; ++i) {
      long long dist = hamming_distance(inst.data.row(i), inst.queries.row(qi),
                                        inst.data.stride);
      bool own = i == qi;
      if (own ? dist != r : dist < 4 * r) {
        throw std::logic_error("hamming generator: distance check failed");
      }
    }
  }
  return inst;
}

HammingPlantedInstance gen_bounded_growth(int n, int d, int r, uint64_t seed,
                                          int num_queries) {
  if (n < 2 || d < 1 || num_queries < 1) throw ParamError("bad instance size");
  const int rings = 4;
  const int per_query = rings * rings;  // 1 + 3 + 5 + 7
  if (num_queries * per_query > n) throw ParamError("n too small for rings");
  if (rings * r > d) throw ParamError("need rings * r <= d");

  Rng rng(seed, 0x67726f77ULL);
  HammingPlantedInstance inst;
  inst.r = r;
  inst.data = BitMatrix::zeros(n, d);
  inst.queries = BitMatrix::zeros(num_queries, d);
  inst.truth.resize(num_queries);

  int row = 0;
  for (int qi = 0; qi < num_queries; ++qi) {
    random_row(inst.queries, qi, rng);
    inst.truth[qi].planted = row;
    inst.truth[qi].r = r;
    for (int ring = 1; ring <= rings; ++ring) {
      for (int c = 0; c < 2 * ring - 1; ++c) {
        std::copy(inst.queries.row(qi),
                  inst.queries.row(qi) + inst.queries.stride,
                  inst.data.row(row));
        flip_bits(inst.data, row, pick_distinct(rng, d, ring * r));
        ++row;
      }
    }
  }
  for (; row < n; ++row) random_row(inst.data, row, rng);
  return inst;
}

HammingPlantedInstance gen_adversarial(int n, int d, int r, double eps,
                                       uint64_t seed, int num_queries) {
  if (n < 2 || d < 1 || num_queries < 1) throw ParamError("bad instance size");
  int near_miss = static_cast<int>(std::floor((1.0 + eps) * r)) + 1;
  if (near_miss + 1 > d) throw ParamError("dimension too small");

  Rng rng(seed, 0x61647665ULL);
  HammingPlantedInstance inst;
  inst.r = r;
  inst.data = BitMatrix::zeros(n, d);
  inst.queries = BitMatrix::zeros(num_queries, d);
  inst.truth.resize(num_queries);

  const int per_query = n / num_queries;
  int row = 0;
  for (int qi = 0; qi < num_queries; ++qi) {
    random_row(inst.queries, qi, rng);
    inst.truth[qi].planted = -1;  // no near point exists
    inst.truth[qi].r = r;
    int count = qi + 1 < num_queries ? per_query : n - row;
    for (int c = 0; c < count; ++c) {
      std::copy(inst.queries.row(qi),
                inst.queries.row(qi) + inst.queries.stride,
                inst.data.row(row));
      int flips = near_miss + (c % 2);
      flip_bits(inst.data, row, pick_distinct(rng, d, flips));
      ++row;
    }
  }
  return inst;
}

BicriterionReport bicriterion_report(const std::vector<int>& answers,
                                     const PlantedInstance& inst,
                                     const LightHeavyParams& lh) {
  if (answers.size() != inst.queries.size()) {
    throw ParamError("answer count does not match query count");
  }
  BicriterionReport rep;
  double ratio_sum = 0.0;
  int hits = 0, light = 0;
  for (size_t qi = 0; qi < answers.size(); ++qi) {
    int a = answers[qi];
    if (a < 0) continue;
    ++rep.answered;
    if (a == inst.truth[qi].planted) ++hits;
    Point residual = diff(inst.queries[qi], inst.data[a]);
    if (is_light(residual, lh, inst.p)) ++light;
    double dist = tail_norm(residual, inst.k, inst.p);
    ratio_sum += inst.truth[qi].r > 0 ? dist / inst.truth[qi].r : 0.0;
  }
  if (rep.answered > 0) {
    rep.recall = double(hits) / rep.answered;
    rep.light_fraction = double(light) / rep.answered;
    rep.mean_ratio = ratio_sum / rep.answered;
  }
  return rep;
}

LemmaCheck check_mean(const std::string& name, double predicted,
                      const std::vector<double>& samples, double tol_se) {
  LemmaCheck c;
  c.name = name;
  c.predicted = predicted;
  c.tol_se = tol_se;
  const double m = double(samples.size());
  double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / m;
  double var = 0.0;
  for (double s : samples) var += (s - mean) * (s - mean);
  var /= std::max(1.0, m - 1.0);
  c.measured = mean;
  c.stderr_ = std::sqrt(var / m);
  c.pass = std::abs(mean - predicted) <= tol_se * c.stderr_;
  return c;
}

LemmaCheck check_factor(const std::string& name, double predicted,
                        double measured, double stderr_, double factor) {
  LemmaCheck c;
  c.name = name;
  c.predicted = predicted;
  c.measured = measured;
  c.stderr_ = stderr_;
  c.tol_factor = factor;
  c.pass = measured >= predicted / factor && measured <= predicted * factor;
  return c;
}

double empirical_collision_rate(int d, int r, long long ell, int i, int trials,
                                uint64_t seed) {
  if (ell > d) throw ParamError("ell must be <= d");
  BitMatrix two = BitMatrix::zeros(2, d);
  Rng init(seed, 0x636f6c6cULL);
  random_row(two, 0, init);
  std::copy(two.row(0), two.row(0) + two.stride, two.row(1));
  std::vector<int> diff_coords = pick_distinct(init, d, static_cast<int>(ell));
  flip_bits(two, 1, diff_coords);

  int collide = 0;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(seed, 0x1000000ULL + trial);
    std::vector<uint64_t> mask = sample_level_mask(d, r, i, 1, rng);
    bool agree = true;
    for (size_t w = 0; w < two.stride && agree; ++w) {
      agree = ((two.row(0)[w] ^ two.row(1)[w]) & mask[w]) == 0;
    }
    collide += agree;
  }
  return double(collide) / trials;
}

namespace {

/// Sample statistics of ||s pt||_p^p for single-block unweighted sampling.
void basic_exp_var_checks(uint64_t seed, int m, std::vector<LemmaCheck>& out) {
  const int d = 200;
  const double pr = 0.1;
  Rng gen(seed, 0x62617369ULL);
  Point pt(d);
  for (double& v : pt) v = 2.0 * gen.next_double() - 1.0;

  for (double p : {1.0, 2.0}) {
    double norm_p = 0.0, norm_2p = 0.0;
    for (double v : pt) {
      norm_p += std::pow(std::abs(v), p);
      norm_2p += std::pow(std::abs(v), 2 * p);
    }
    std::vector<double> samples(m);
    for (int t = 0; t < m; ++t) {
      Rng rng(seed, 0x73616d70ULL + t + static_cast<uint64_t>(p) * m);
      double sum = 0.0;
      for (int j = 0; j < d; ++j) {
        if (rng.bernoulli(pr)) sum += std::pow(std::abs(pt[j]), p);
      }
      samples[t] = sum;
    }
    std::string tag = p == 1.0 ? "p1" : "p2";
    out.push_back(check_mean("single_block_mean_" + tag, pr * norm_p, samples,
                             4.0));
    double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / m;
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    var /= m - 1;
    LemmaCheck vc = check_factor("single_block_var_" + tag,
                                 pr * (1 - pr) * norm_2p, var, 0.0, 1.10);
    vc.note = "variance within 10%";
    out.push_back(vc);
  }
}

/// Probability that a t-block projection misses the k heaviest coordinates.
void success_checks(uint64_t seed, int m, std::vector<LemmaCheck>& out) {
  const double delta = 0.5;
  for (int n : {100, 1000}) {
    for (int k : {4, 16}) {
      const double c2 = 16.0, c1 = c2 / delta;
      const double pr = 1.0 / (c1 * k);
      const int t = static_cast<int>(std::ceil(c2 * std::log(n)));
      const int d = 4 * k;  // any fixed k-subset behaves identically
      int miss = 0;
      for (int trial = 0; trial < m; ++trial) {
        SamplingConfig sc{pr, t, seed + n, 0x200000ULL + trial};
        Projection proj = sample_projection(d, sc);
        bool hit = false;
        for (const ProjEntry& e : proj.entries) {
          if (e.index < static_cast<uint32_t>(k)) {
            hit = true;
            break;
          }
        }
        miss += !hit;
      }
      double measured = double(miss) / m;
      double predicted = std::pow(double(n), -c2 / c1);
      double se = std::sqrt(measured * (1 - measured) / m);
      LemmaCheck c = check_factor("miss_prob_n" + std::to_string(n) + "_k" +
                                      std::to_string(k),
                                  predicted, measured, se, 2.0);
      out.push_back(c);
    }
  }
}

/// E[||s pt||_1] = ||pt||_1 for one weighted block, and t times that for t
/// blocks.
void weighted_expectation_checks(uint64_t seed, int m,
                                 std::vector<LemmaCheck>& out) {
  const int d = 16;
  Rng gen(seed, 0x77656967ULL);
  Point pt(d);
  std::vector<double> costs(d);
  double norm1 = 0.0;
  for (int j = 0; j < d; ++j) {
    pt[j] = 2.0 * gen.next_double() - 1.0;
    costs[j] = 0.1 + 0.9 * gen.next_double();
    norm1 += std::abs(pt[j]);
  }

  // c1 = 1 makes the weighted sampler include coordinate j with probability
  // costs[j] at scale 1/costs[j], the plain importance-sampling block.
  std::vector<double> single(m);
  for (int trial = 0; trial < m; ++trial) {
    Projection proj =
        sample_weighted_projection(costs, 1.0, 1, seed, 0x300000ULL + trial);
    double sum = 0.0;
    for (const ProjEntry& e : proj.entries) {
      sum += e.count * e.scale * std::abs(pt[e.index]);
    }
    single[trial] = sum;
  }
  out.push_back(check_mean("weighted_single_block_mean", norm1, single, 4.0));

  const double c1 = 8.0;
  const int t = 16;
  std::vector<double> multi(m);
  for (int trial = 0; trial < m; ++trial) {
    Projection proj =
        sample_weighted_projection(costs, c1, t, seed, 0x400000ULL + trial);
    double sum = 0.0;
    for (const ProjEntry& e : proj.entries) {
      sum += e.count * e.scale * std::abs(pt[e.index]);
    }
    multi[trial] = sum;
  }
  out.push_back(check_mean("weighted_t_block_mean", t * norm1, multi, 4.0));
}

/// Probability that a weighted t-block projection misses an affordable set.
void budget_success_check(uint64_t seed, int m, std::vector<LemmaCheck>& out) {
  const int n = 1000;
  const double delta = 0.5;
  const double c2 = 4.0, c1 = 2.0 * c2 / delta;
  const int t = static_cast<int>(std::ceil(c2 * std::log(n)));
  std::vector<double> bad_costs = {0.25, 0.25, 0.25, 0.25};  // total cost 1
  int miss = 0;
  for (int trial = 0; trial < m; ++trial) {
    Projection proj = sample_weighted_projection(bad_costs, c1, t, seed,
                                                 0x500000ULL + trial);
    miss += proj.entries.empty();
  }
  double measured = double(miss) / m;
  double predicted = std::pow(double(n), -2.0 * c2 / c1);
  double se = std::sqrt(measured * (1 - measured) / m);
  LemmaCheck c;
  c.name = "budget_miss_prob_n1000";
  c.predicted = predicted;
  c.measured = measured;
  c.stderr_ = se;
  c.pass = measured >= predicted / 2.0;  // one-sided lower bound
  c.note = "lower bound: measured >= predicted/2";
  out.push_back(c);
}

void collision_rate_checks(uint64_t seed, int m, std::vector<LemmaCheck>& out) {
  const int d = 256, r = 16;
  for (long long ell : {4LL, 16LL}) {
    for (int i : {1, 3}) {
      double predicted = collision_probability(r, ell, i);
      double measured = empirical_collision_rate(d, r, ell, i, m, seed);
      double se = std::sqrt(std::max(measured * (1 - measured), 1e-12) / m);
      LemmaCheck c;
      c.name = "collision_rate_ell" + std::to_string(ell) + "_i" +
               std::to_string(i);
      c.predicted = predicted;
      c.measured = measured;
      c.stderr_ = se;
      c.tol_se = 4.0;
      c.pass = std::abs(measured - predicted) <= 4.0 * se;
      out.push_back(c);
    }
  }
}

}  // namespace

std::vector<LemmaCheck> lemma_suite(uint64_t seed, double scale) {
  if (!(scale > 0.0 && scale <= 1.0)) throw ParamError("scale must be in (0,1]");
  auto scaled = [&](int full) {
    return std::max(500, static_cast<int>(full * scale));
  };
  std::vector<LemmaCheck> out;
  basic_exp_var_checks(seed, scaled(100000), out);
  success_checks(seed, scaled(100000), out);
  weighted_expectation_checks(seed, scaled(100000), out);
  budget_success_check(seed, scaled(100000), out);
  collision_rate_checks(seed, scaled(10000), out);
  return out;
}

}  // namespace rann
