#pragma once

#include <string>
#include <vector>

#include "rann/bits.hpp"
#include "rann/common.hpp"
#include "rann/core.hpp"

namespace rann {

/// Ground truth for one query of a planted instance.
struct QueryTruth {
  int planted = -1;
  std::vector<int> corrupted;
  double r = 0.0;
  double corrupted_cost = 0.0;  // budgeted instances only
};

/// A dataset with known-good answers: every query has one planted neighbor
/// at robust distance ~r whose corruption the index must see through, while
/// all decoys stay far even after ignoring twice the allowed coordinates.
struct PlantedInstance {
  std::vector<Point> data;
  std::vector<Point> queries;
  std::vector<QueryTruth> truth;
  int n = 0, d = 0, k = 0;
  double r = 0.0, noise_mag = 0.0, p = 1.0;
  uint64_t seed = 0;
};

PlantedInstance gen_planted(int n, int d, int k, double r, double noise_mag,
                            uint64_t seed, int num_queries = 1, double p = 1.0);

enum class CostProfile { Uniform, Random, File };

struct BudgetedPlantedInstance {
  std::vector<Point> data;
  std::vector<Point> queries;
  std::vector<QueryTruth> truth;
  std::vector<double> costs;
  int n = 0, d = 0;
  double r = 0.0, noise_mag = 0.0;
  uint64_t seed = 0;
};

/// Budgeted analogue: each planted neighbor is corrupted on a coordinate set
/// of total cost <= 1; decoy mass is spread so that no affordable ignore set
/// brings a decoy under 4r. Uniform profile uses cost 1/k everywhere; the
/// File profile uses the supplied costs verbatim.
BudgetedPlantedInstance gen_planted_budgeted(int n, int d, double r,
                                             double noise_mag, uint64_t seed,
                                             int num_queries,
                                             CostProfile profile,
                                             int uniform_k = 4,
                                             std::vector<double> file_costs = {});

struct HammingPlantedInstance {
  BitMatrix data;
  BitMatrix queries;
  std::vector<QueryTruth> truth;  // planted index + exact distance in r
  int r = 0;
};

/// One planted point at Hamming distance exactly r per query; decoys at
/// distance >= 4r.
HammingPlantedInstance gen_planted_hamming(int n, int d, int r, uint64_t seed,
                                           int num_queries);

/// Locally low-dimensional data: each query sees rings at distance j*r with
/// cumulative population j^2 (bounded growth), plus far filler points.
HammingPlantedInstance gen_bounded_growth(int n, int d, int r, uint64_t seed,
                                          int num_queries);

/// Hard crowd: each query is surrounded by points just beyond (1+eps)r, so
/// every level stays over its collision threshold until the end.
HammingPlantedInstance gen_adversarial(int n, int d, int r, double eps,
                                       uint64_t seed, int num_queries);

struct BicriterionReport {
  int answered = 0;
  double recall = 0.0;
  double light_fraction = 0.0;
  double mean_ratio = 0.0;  // robust distance of answer vs. planted r
};

/// Scores index answers against a planted instance; answers[i] < 0 marks an
/// unanswered query and is skipped.
BicriterionReport bicriterion_report(const std::vector<int>& answers,
                                     const PlantedInstance& inst,
                                     const LightHeavyParams& lh);

/// One statistical check: measured vs. predicted with its tolerance. Factor
/// checks (rare events) set tol_factor instead of tol_se.
struct LemmaCheck {
  std::string name;
  double predicted = 0.0;
  double measured = 0.0;
  double stderr_ = 0.0;
  double tol_se = 0.0;      // pass iff |measured-predicted| <= tol_se * stderr_
  double tol_factor = 0.0;  // pass iff measured within [pred/f, pred*f]
  bool pass = false;
  std::string note;
};

LemmaCheck check_mean(const std::string& name, double predicted,
                      const std::vector<double>& samples, double tol_se);
LemmaCheck check_factor(const std::string& name, double predicted,
                        double measured, double stderr_, double factor);

/// Runs every statistical property the modules promise, at the fixed sample
/// sizes, and reports predicted/measured/stderr/verdict per check. scale
/// shrinks the sample sizes for quick runs.
std::vector<LemmaCheck> lemma_suite(uint64_t seed, double scale = 1.0);

/// Fraction of trials in which a level-i coordinate subset avoids all ell
/// differing coordinates of two points in {0,1}^d.
double empirical_collision_rate(int d, int r, long long ell, int i, int trials,
                                uint64_t seed);

}  // namespace rann
