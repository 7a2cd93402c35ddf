// Acceptance suite: runs every toolkit-level criterion end to end and prints
// one PASS/FAIL line per criterion. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "rann/budgeted.hpp"
#include "rann/ds_lsh.hpp"
#include "rann/eval.hpp"
#include "rann/robust_index.hpp"

using namespace rann;

namespace {

int failures = 0;

void report(int id, const char* name, bool pass, double seconds,
            double limit_seconds, const std::string& detail) {
  bool in_time = seconds <= limit_seconds;
  std::printf("C%-2d %s  %-28s %6.1fs (limit %4.0fs)  %s%s\n", id,
              pass && in_time ? "PASS" : "FAIL", name, seconds, limit_seconds,
              detail.c_str(), in_time ? "" : "  [over time limit]");
  if (!pass || !in_time) ++failures;
}

struct Timer {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// C1: the selection-based brute force agrees exactly with an independent
// sort-based exhaustive implementation.
void criterion1() {
  Timer timer;
  std::mt19937_64 rng(1001);
  const int ks[] = {0, 1, 3, 9};
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 50, d = 10;
    int k = ks[trial % 4];
    std::vector<Point> pts(n);
    for (Point& pt : pts) pt = oracle::random_point(rng, d, -10.0, 10.0);
    Point q = oracle::random_point(rng, d, -10.0, 10.0);
    auto got = robust_nn_bruteforce(pts, q, {1.0, k});
    auto want = oracle::robust_nn_sorted(pts, q, k, 1.0);
    if (got.first != want.first ||
        std::abs(got.second - want.second) > 1e-9) {
      ++mismatches;
    }
  }
  report(1, "oracle_equivalence", mismatches == 0, timer.seconds(), 10.0,
         fmt("mismatches=%d/1000 (n=50 d=10 k in {0,1,3,9})", mismatches));
}

// C2: single-block projection statistics: mean within 4 stderr, variance
// within 10%, for p in {1,2}.
void criterion2() {
  Timer timer;
  const int d = 200, m = 100000;
  const double pr = 0.1;
  std::mt19937_64 gen(1002);
  Point pt = oracle::random_point(gen, d, -1.0, 1.0);
  bool pass = true;
  std::string detail;
  for (double p : {1.0, 2.0}) {
    double norm_p = 0.0, norm_2p = 0.0;
    for (double v : pt) {
      norm_p += std::pow(std::abs(v), p);
      norm_2p += std::pow(std::abs(v), 2 * p);
    }
    std::vector<double> samples(m);
    for (int i = 0; i < m; ++i) {
      Projection proj =
          sample_projection(d, {pr, 1, 777 + uint64_t(p), uint64_t(i)});
      double sum = 0.0;
      for (const ProjEntry& e : proj.entries) {
        sum += e.count * std::pow(std::abs(pt[e.index]), p);
      }
      samples[i] = sum;
    }
    double mean = oracle::mean(samples);
    double se = oracle::stderr_of_mean(samples);
    double var = oracle::variance(samples);
    double want_mean = pr * norm_p;
    double want_var = pr * (1 - pr) * norm_2p;
    bool mean_ok = std::abs(mean - want_mean) <= 4.0 * se;
    bool var_ok = std::abs(var - want_var) <= 0.10 * want_var;
    pass = pass && mean_ok && var_ok;
    detail += fmt("p=%.0f mean %.4f/%.4f var %.4f/%.4f  ", p, mean, want_mean,
                  var, want_var);
  }
  report(2, "projection_statistics", pass, timer.seconds(), 30.0, detail);
}

// C3: rare-event miss probability of a fixed 8-coordinate set within a
// factor 2 of n^(-1/2).
void criterion3() {
  Timer timer;
  const int n = 1000, k = 8, d = 128, m = 100000;
  const double delta = 0.5, c2 = 16.0, c1 = c2 / delta;
  const double pr = 1.0 / (c1 * k);
  const int t = int(std::ceil(c2 * std::log(double(n))));
  int misses = 0;
  for (int trial = 0; trial < m; ++trial) {
    Projection proj = sample_projection(d, {pr, t, 1003, uint64_t(trial)});
    bool hit = false;
    for (const ProjEntry& e : proj.entries) {
      if (e.index < k) {
        hit = true;
        break;
      }
    }
    misses += !hit;
  }
  double measured = double(misses) / m;
  double predicted = 1.0 / std::sqrt(double(n));
  bool pass = measured >= predicted / 2.0 && measured <= predicted * 2.0;
  report(3, "rare_event_miss_prob", pass, timer.seconds(), 60.0,
         fmt("measured=%.5f predicted=%.5f factor=%.2f", measured, predicted,
             measured / predicted));
}

// C4: planted recovery with exact backends: recall >= 0.9 and 100%
// lightness at (r/k^(1/p), (lambda+1)^(1/p) r).
void criterion4() {
  Timer timer;
  PlantedInstance inst = gen_planted(500, 64, 4, 1.0, 10.0, 1004, 50);
  RobustIndexConfig cfg;
  cfg.k = 4;
  cfg.delta = 0.5;
  cfg.seed = 44;
  RobustIndex idx = RobustIndex::build(inst.data, cfg);
  std::vector<int> answers;
  for (const Point& q : inst.queries) answers.push_back(idx.query(q).index);
  double lambda = idx.derived().lambda;
  LightHeavyParams lh{inst.r / std::pow(4.0, 1.0 / inst.p),
                      std::pow(lambda + 1.0, 1.0 / inst.p) * inst.r};
  BicriterionReport rep = bicriterion_report(answers, inst, lh);
  bool pass = rep.recall >= 0.9 && rep.light_fraction == 1.0;
  report(4, "bicriterion_recovery", pass, timer.seconds(), 120.0,
         fmt("recall=%.2f light=%.2f ratio=%.3f (L=%d)", rep.recall,
             rep.light_fraction, rep.mean_ratio,
             idx.derived().num_substructures));
}

// C5: eps-approx mode: distance after ignoring ceil(k/(delta eps^5))
// coordinates is <= (1+2eps) r for >= 95% of queries.
void criterion5() {
  Timer timer;
  const double eps = 0.5, delta = 0.5;
  PlantedInstance inst = gen_planted(500, 64, 4, 1.0, 10.0, 1005, 50);
  RobustIndexConfig cfg;
  cfg.k = 4;
  cfg.delta = delta;
  cfg.mode = RobustMode::EpsApprox;
  cfg.eps = eps;
  cfg.seed = 55;
  RobustIndex idx = RobustIndex::build(inst.data, cfg);
  int ignore = std::min(
      inst.d, int(std::ceil(cfg.k / (delta * std::pow(eps, 5)))));
  int ok = 0, hits = 0;
  for (size_t qi = 0; qi < inst.queries.size(); ++qi) {
    RobustQueryResult res = idx.query(inst.queries[qi]);
    hits += res.index == inst.truth[qi].planted;
    Point residual = diff(inst.queries[qi], inst.data[res.index]);
    double after = tail_norm(residual, ignore, inst.p);
    ok += after <= (1.0 + 2.0 * eps) * inst.truth[qi].r + 1e-9;
  }
  double frac = double(ok) / inst.queries.size();
  bool pass = frac >= 0.95;
  report(5, "eps_mode_recovery", pass, timer.seconds(), 180.0,
         fmt("within_(1+2eps)r=%.2f recall=%.2f ignore=%d (L=%d)", frac,
             double(hits) / inst.queries.size(), ignore,
             idx.derived().num_substructures));
}

// C6: knapsack sandwich: exact <= approx <= (1+eps) exact with admissible
// sets, on 500 random low-dimensional instances.
void criterion6() {
  Timer timer;
  std::mt19937_64 rng(1006);
  int bad = 0;
  for (int trial = 0; trial < 500; ++trial) {
    int d = 2 + int(rng() % 11);
    Point a = oracle::random_point(rng, d, -8.0, 8.0);
    Point b = oracle::random_point(rng, d, -8.0, 8.0);
    std::vector<double> costs(d);
    for (double& c : costs) c = 0.02 + 0.98 * double(rng() % 1000) / 1000.0;
    AdmissibleResult exact = admissible_distance_exact(a, b, costs);
    for (double eps : {0.1, 0.5}) {
      AdmissibleResult approx = admissible_distance_approx(a, b, costs, eps);
      double cost = 0.0;
      for (int i : approx.ignored) cost += costs[i];
      bool ok = approx.distance >= exact.distance - 1e-9 &&
                approx.distance <= (1 + eps) * exact.distance + 1e-9 &&
                cost <= 1.0 + 1e-9;
      bad += !ok;
    }
  }
  report(6, "knapsack_sandwich", bad == 0, timer.seconds(), 30.0,
         fmt("violations=%d/1000 (500 instances x eps in {0.1,0.5})", bad));
}

// C7: budgeted recovery: recall >= 0.9 and 100% lightness at
// (r, w, 33(1+eps)r).
void criterion7() {
  Timer timer;
  BudgetedPlantedInstance inst =
      gen_planted_budgeted(500, 64, 1.0, 10.0, 1007, 50, CostProfile::Random);
  BudgetedConfig cfg;
  cfg.delta = 0.5;
  cfg.eps = 0.5;
  cfg.seed = 77;
  BudgetedIndex idx = BudgetedIndex::build(inst.data, inst.costs, cfg);
  const double c1 = idx.derived().coord_const;
  int hits = 0, light = 0;
  for (size_t qi = 0; qi < inst.queries.size(); ++qi) {
    BudgetedQueryResult res = idx.query(inst.queries[qi]);
    hits += res.index == inst.truth[qi].planted;
    Point residual = diff(inst.queries[qi], inst.data[res.index]);
    light += is_light_weighted(residual, inst.r, inst.costs, c1,
                               33.0 * (1.0 + cfg.eps) * inst.r);
  }
  double recall = double(hits) / inst.queries.size();
  double light_frac = double(light) / inst.queries.size();
  bool pass = recall >= 0.9 && light_frac == 1.0;
  report(7, "budgeted_recovery", pass, timer.seconds(), 180.0,
         fmt("recall=%.2f light=%.2f (L=%d c1=%.0f)", recall, light_frac,
             idx.derived().num_substructures, c1));
}

// C8: ds-lsh planted correctness: NEAR with a (1+eps)r witness in >= 95 of
// 100 trials; early stops return the exact nearest neighbor.
void criterion8() {
  Timer timer;
  HammingPlantedInstance inst = gen_planted_hamming(1000, 256, 16, 1008, 100);
  DsLshConfig cfg;
  cfg.r = 16;
  cfg.eps = 0.5;
  cfg.seed = 88;
  DsLshIndex idx = DsLshIndex::build(inst.data, cfg);
  int near = 0, early = 0, early_exact = 0;
  for (int qi = 0; qi < inst.queries.n; ++qi) {
    DsLshResult res = idx.query(inst.queries.row_copy(qi));
    if (res.near && res.distance <= (1.0 + cfg.eps) * cfg.r) ++near;
    if (res.stats.stop_level < idx.levels()) {
      ++early;
      // exact NN by brute force
      int best = -1;
      long long best_dist = 0;
      for (int i = 0; i < inst.data.n; ++i) {
        long long dist = hamming_distance(
            inst.data.row(i), inst.queries.row(qi), inst.data.stride);
        if (best < 0 || dist < best_dist) {
          best = i;
          best_dist = dist;
        }
      }
      early_exact += res.witness == best;
    }
  }
  bool pass = near >= 95 && early_exact == early;
  report(8, "dslsh_planted_near", pass, timer.seconds(), 120.0,
         fmt("near=%d/100 early=%d exact_on_early=%d levels=%d", near, early,
             early_exact, idx.levels()));
}

// C9: data sensitivity: bounded-growth queries stop early and scan little;
// an adversarial crowd drives the walk to the top levels.
void criterion9() {
  Timer timer;
  HammingPlantedInstance growth = gen_bounded_growth(1000, 512, 8, 1009, 50);
  DsLshConfig cfg;
  cfg.r = 8;
  cfg.eps = 0.5;
  cfg.seed = 99;
  DsLshIndex gidx = DsLshIndex::build(growth.data, cfg);
  double level_sum = 0.0, scanned_sum = 0.0;
  for (int qi = 0; qi < growth.queries.n; ++qi) {
    DsLshResult res = gidx.query(growth.queries.row_copy(qi));
    level_sum += res.stats.stop_level;
    scanned_sum += double(res.stats.scanned);
  }
  double mean_level = level_sum / growth.queries.n;
  double mean_scanned = scanned_sum / growth.queries.n;
  double scan_budget = 50.0 * std::log(1000.0);

  HammingPlantedInstance adv = gen_adversarial(1000, 512, 8, 0.5, 1009, 5);
  DsLshIndex aidx = DsLshIndex::build(adv.data, cfg);
  double adv_level_sum = 0.0;
  for (int qi = 0; qi < adv.queries.n; ++qi) {
    adv_level_sum += aidx.query(adv.queries.row_copy(qi)).stats.stop_level;
  }
  double adv_mean_level = adv_level_sum / adv.queries.n;

  bool pass = mean_level <= 4.0 && mean_scanned <= scan_budget &&
              adv_mean_level >= aidx.levels() - 1;
  report(9, "dslsh_data_sensitivity", pass, timer.seconds(), 120.0,
         fmt("growth level=%.2f scanned=%.1f (budget %.1f); adversarial "
             "level=%.2f (N=%d)",
             mean_level, mean_scanned, scan_budget, adv_mean_level,
             aidx.levels()));
}

// C10: collision probability law at r=16, d=256 over 10^4 sampled subsets.
void criterion10() {
  Timer timer;
  const int d = 256, r = 16, m = 10000;
  bool pass = true;
  std::string detail;
  for (long long ell : {4LL, 16LL, 64LL}) {
    for (int i : {1, 3, 5}) {
      double predicted = collision_probability(r, ell, i);
      double measured =
          empirical_collision_rate(d, r, ell, i, m, 1010 + 31 * ell + i);
      double se =
          std::sqrt(std::max(predicted * (1 - predicted), 1e-12) / m);
      bool ok = std::abs(measured - predicted) <= 4.0 * se;
      pass = pass && ok;
      if (!ok) {
        detail += fmt("ell=%lld i=%d m=%.4g p=%.4g! ", ell, i, measured,
                      predicted);
      }
    }
  }
  if (detail.empty()) detail = "all 9 (ell, level) combinations within 4 se";
  report(10, "collision_probability_law", pass, timer.seconds(), 30.0, detail);
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  std::printf(failures == 0 ? "ALL CRITERIA PASSED\n"
                            : "%d CRITERIA FAILED\n",
              failures);
  return failures == 0 ? 0 : 1;
}
