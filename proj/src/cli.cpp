#include "rann/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rann/budgeted.hpp"
#include "rann/ds_lsh.hpp"
#include "rann/eval.hpp"
#include "rann/io.hpp"
#include "rann/robust_index.hpp"

namespace rann {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path);
  return in;
}

uint8_t peek_index_mode(const std::string& path) {
  auto in = open_in(path);
  BinReader r(in);
  char magic[4];
  r.raw(magic, 4);
  if (std::string(magic, 4) != "RIDX") throw DataError("not an index file");
  uint32_t version = r.u32();
  if (version != 1) {
    throw DataError("unsupported index version " + std::to_string(version));
  }
  return r.u8();
}

std::vector<json> read_jsonl(const std::string& path) {
  auto in = open_in(path);
  std::vector<json> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw DataError("bad record in " + path + ": " + e.what());
    }
  }
  return rows;
}

struct GenArgs {
  std::string mode = "robust";
  int n = 500, d = 64, k = 4, queries = 50;
  double r = 1.0, noise = 10.0, p = 1.0;
  uint64_t seed = 0;
  std::string out;
  std::string costs_profile = "random";
  std::string costs_file;
  std::string variant = "planted";
};

void cmd_gen(const GenArgs& a) {
  if (a.mode != "robust" && a.mode != "budgeted" && a.mode != "dslsh") {
    throw ParamError("mode must be robust, budgeted or dslsh");
  }
  if (a.k >= a.d) throw ParamError("need k < d");

  auto truth_out = open_out(a.out + ".truth.jsonl");
  Dataset data, queries;

  if (a.mode == "robust") {
    PlantedInstance inst =
        gen_planted(a.n, a.d, a.k, a.r, a.noise, a.seed, a.queries, a.p);
    data.real = inst.data;
    queries.real = inst.queries;
    for (size_t qi = 0; qi < inst.truth.size(); ++qi) {
      const QueryTruth& t = inst.truth[qi];
      truth_out << json{{"query", qi},
                        {"planted", t.planted},
                        {"r", t.r},
                        {"corrupted", t.corrupted}}
                << '\n';
    }
  } else if (a.mode == "budgeted") {
    CostProfile profile;
    std::vector<double> file_costs;
    if (a.costs_profile == "uniform") {
      profile = CostProfile::Uniform;
    } else if (a.costs_profile == "random") {
      profile = CostProfile::Random;
    } else if (a.costs_profile == "file") {
      profile = CostProfile::File;
      if (a.costs_file.empty()) {
        throw ParamError("costs-profile file needs --costs-file");
      }
      file_costs = read_costs_csv(a.costs_file);
    } else {
      throw ParamError("costs-profile must be uniform, random or file");
    }
    BudgetedPlantedInstance inst =
        gen_planted_budgeted(a.n, a.d, a.r, a.noise, a.seed, a.queries,
                             profile, a.k, std::move(file_costs));
    data.real = inst.data;
    queries.real = inst.queries;
    write_costs_csv(a.out + ".costs.csv", inst.costs);
    for (size_t qi = 0; qi < inst.truth.size(); ++qi) {
      const QueryTruth& t = inst.truth[qi];
      truth_out << json{{"query", qi},
                        {"planted", t.planted},
                        {"r", t.r},
                        {"corrupted", t.corrupted},
                        {"cost", t.corrupted_cost}}
                << '\n';
    }
  } else {
    int radius = static_cast<int>(a.r);
    if (radius < 1) throw ParamError("dslsh radius must be a positive integer");
    HammingPlantedInstance inst;
    if (a.variant == "planted") {
      inst = gen_planted_hamming(a.n, a.d, radius, a.seed, a.queries);
    } else if (a.variant == "growth") {
      inst = gen_bounded_growth(a.n, a.d, radius, a.seed, a.queries);
    } else if (a.variant == "adversarial") {
      inst = gen_adversarial(a.n, a.d, radius, 0.5, a.seed, a.queries);
    } else {
      throw ParamError("variant must be planted, growth or adversarial");
    }
    data.elem = ElemType::Bit;
    data.bits = inst.data;
    queries.elem = ElemType::Bit;
    queries.bits = inst.queries;
    for (size_t qi = 0; qi < inst.truth.size(); ++qi) {
      truth_out << json{{"query", qi},
                        {"planted", inst.truth[qi].planted},
                        {"r", inst.truth[qi].r}}
                << '\n';
    }
  }
  write_dataset_file(a.out + ".data", data);
  write_dataset_file(a.out + ".queries", queries);
}

struct BuildArgs {
  std::string mode = "robust";
  std::string data, out, costs;
  uint64_t seed = 0;
  int k = 4;
  double p = 1.0, delta = 0.5, c = 1.0, eps = 0.5, L_scale = 1.0;
  std::string backend = "exact";
  std::string approx = "const";
  int tables = 16, bits = 16, buckets = 32;
  int r = 1, dup = 0;
  double alpha = 8.0, c3 = 3.0;
  bool early_exit = false;
};

AnnBackendSpec backend_spec(const BuildArgs& a) {
  AnnBackendSpec spec;
  if (a.backend == "exact") {
    spec.kind = BackendKind::ExactScan;
  } else if (a.backend == "bitlsh") {
    spec.kind = BackendKind::BitSampleLsh;
  } else {
    throw ParamError("backend must be exact or bitlsh");
  }
  spec.c = a.c;
  spec.p = a.p;
  spec.tables = a.tables;
  spec.bits_per_hash = a.bits;
  spec.discretize_buckets = a.buckets;
  return spec;
}

void cmd_build(const BuildArgs& a) {
  Dataset data = read_dataset_file(a.data);
  auto out = open_out(a.out);
  BinWriter w(out);

  if (a.mode == "robust") {
    if (data.is_binary()) {
      throw DataError("robust index needs real-valued data");
    }
    RobustIndexConfig cfg;
    cfg.k = a.k;
    cfg.p = a.p;
    cfg.delta = a.delta;
    cfg.mode = a.approx == "eps" ? RobustMode::EpsApprox
                                 : RobustMode::ConstantFactor;
    cfg.eps = a.eps;
    cfg.L_scale = a.L_scale;
    cfg.seed = a.seed;
    cfg.backend = backend_spec(a);
    RobustIndex::build(std::move(data.real), cfg).save(w);
  } else if (a.mode == "budgeted") {
    if (data.is_binary()) {
      throw DataError("budgeted index needs real-valued data");
    }
    if (a.costs.empty()) throw ParamError("budgeted build needs --costs");
    BudgetedConfig cfg;
    cfg.delta = a.delta;
    cfg.eps = a.eps;
    cfg.L_scale = a.L_scale;
    cfg.seed = a.seed;
    cfg.backend = backend_spec(a);
    BudgetedIndex::build(std::move(data.real), read_costs_csv(a.costs), cfg)
        .save(w);
  } else if (a.mode == "dslsh") {
    if (!data.is_binary()) {
      throw DataError("dslsh index needs binary (bit) data");
    }
    DsLshConfig cfg;
    cfg.r = a.r;
    cfg.eps = a.eps;
    cfg.alpha = a.alpha;
    cfg.c3 = a.c3;
    cfg.seed = a.seed;
    cfg.dup_factor = a.dup;
    cfg.sample_early_exit = a.early_exit;
    DsLshIndex::build(data.bits, cfg).save(w);
  } else {
    throw ParamError("mode must be robust, budgeted or dslsh");
  }
}

struct QueryArgs {
  std::string index, queries, out;
  bool stats = false;
};

void cmd_query(const QueryArgs& a) {
  uint8_t mode = peek_index_mode(a.index);
  Dataset queries = read_dataset_file(a.queries);
  auto out = open_out(a.out);
  auto in = open_in(a.index);
  BinReader r(in);

  if (mode == 0) {
    RobustIndex idx = RobustIndex::load(r);
    if (queries.is_binary()) throw DataError("robust query needs real data");
    for (size_t qi = 0; qi < queries.real.size(); ++qi) {
      auto start = Clock::now();
      RobustQueryResult res = idx.query(queries.real[qi]);
      json rec{{"query", qi},
               {"answer", res.index},
               {"distance", res.robust_distance},
               {"time_ms", ms_since(start)}};
      int fallbacks = 0;
      for (const SubQueryStat& s : res.stats) fallbacks += s.fallback;
      rec["fallbacks"] = fallbacks;
      if (a.stats) {
        json stats = json::array();
        for (const SubQueryStat& s : res.stats) {
          stats.push_back({{"candidate", s.candidate},
                           {"projected_distance", s.projected_distance},
                           {"fallback", s.fallback}});
        }
        rec["stats"] = std::move(stats);
      }
      out << rec << '\n';
    }
  } else if (mode == 1) {
    BudgetedIndex idx = BudgetedIndex::load(r);
    if (queries.is_binary()) throw DataError("budgeted query needs real data");
    for (size_t qi = 0; qi < queries.real.size(); ++qi) {
      auto start = Clock::now();
      BudgetedQueryResult res = idx.query(queries.real[qi]);
      json rec{{"query", qi},
               {"answer", res.index},
               {"distance", res.distance},
               {"ignored", res.ignored},
               {"fallbacks", res.fallbacks},
               {"time_ms", ms_since(start)}};
      if (a.stats) rec["candidates"] = res.candidates;
      out << rec << '\n';
    }
  } else if (mode == 2) {
    DsLshIndex idx = DsLshIndex::load(r);
    if (!queries.is_binary()) {
      throw DataError("dslsh query needs binary (bit) queries");
    }
    if (queries.bits.d != idx.points().d) {
      throw DataError("query dimension does not match index");
    }
    for (int qi = 0; qi < queries.bits.n; ++qi) {
      auto start = Clock::now();
      DsLshResult res = idx.query(queries.bits.row_copy(qi));
      json rec{{"query", qi},
               {"outcome", res.near ? "NEAR" : "FAR"},
               {"witness", res.witness},
               {"distance", res.distance},
               {"stop_level", res.stats.stop_level},
               {"scanned", res.stats.scanned},
               {"time_ms", ms_since(start)}};
      if (a.stats) rec["collisions"] = res.stats.collisions;
      out << rec << '\n';
    }
  } else {
    throw DataError("unknown index mode tag");
  }
}

struct OracleArgs {
  std::string mode = "robust";
  std::string data, queries, costs, out;
  int k = 4, r = 1;
  double p = 1.0, eps = 0.05;
};

void cmd_oracle(const OracleArgs& a) {
  Dataset data = read_dataset_file(a.data);
  Dataset queries = read_dataset_file(a.queries);
  auto out = open_out(a.out);

  if (a.mode == "robust") {
    if (data.is_binary()) throw DataError("robust oracle needs real data");
    for (size_t qi = 0; qi < queries.real.size(); ++qi) {
      auto [idx, dist] =
          robust_nn_bruteforce(data.real, queries.real[qi], {a.p, a.k});
      out << json{{"query", qi}, {"answer", idx}, {"distance", dist}} << '\n';
    }
  } else if (a.mode == "budgeted") {
    if (data.is_binary()) throw DataError("budgeted oracle needs real data");
    if (a.costs.empty()) throw ParamError("budgeted oracle needs --costs");
    std::vector<double> costs = read_costs_csv(a.costs);
    for (size_t qi = 0; qi < queries.real.size(); ++qi) {
      int best = -1;
      double best_dist = 0.0;
      for (size_t i = 0; i < data.real.size(); ++i) {
        AdmissibleResult ar = admissible_distance_approx(
            data.real[i], queries.real[qi], costs, a.eps);
        if (best < 0 || ar.distance < best_dist) {
          best = static_cast<int>(i);
          best_dist = ar.distance;
        }
      }
      out << json{{"query", qi}, {"answer", best}, {"distance", best_dist}}
          << '\n';
    }
  } else if (a.mode == "dslsh") {
    if (!data.is_binary() || !queries.is_binary()) {
      throw DataError("dslsh oracle needs binary data");
    }
    for (int qi = 0; qi < queries.bits.n; ++qi) {
      int best = -1;
      long long best_dist = 0;
      for (int i = 0; i < data.bits.n; ++i) {
        long long dist = hamming_distance(
            data.bits.row(i), queries.bits.row(qi), data.bits.stride);
        if (best < 0 || dist < best_dist) {
          best = i;
          best_dist = dist;
        }
      }
      out << json{{"query", qi},
                  {"answer", best},
                  {"distance", best_dist},
                  {"near", best_dist <= a.r}}
          << '\n';
    }
  } else {
    throw ParamError("mode must be robust, budgeted or dslsh");
  }
}

struct LemmasArgs {
  uint64_t seed = 42;
  double scale = 1.0;
  std::string out;
};

int cmd_lemmas(const LemmasArgs& a) {
  std::vector<LemmaCheck> checks = lemma_suite(a.seed, a.scale);
  std::ofstream file;
  if (!a.out.empty()) file = open_out(a.out);
  bool all_pass = true;
  for (const LemmaCheck& c : checks) {
    json rec{{"name", c.name},
             {"predicted", c.predicted},
             {"measured", c.measured},
             {"stderr", c.stderr_},
             {"pass", c.pass}};
    if (c.tol_se > 0) rec["tol_se"] = c.tol_se;
    if (c.tol_factor > 0) rec["tol_factor"] = c.tol_factor;
    if (!c.note.empty()) rec["note"] = c.note;
    if (!a.out.empty()) file << rec << '\n';
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name
              << "  predicted=" << c.predicted << "  measured=" << c.measured
              << "  stderr=" << c.stderr_ << '\n';
    all_pass = all_pass && c.pass;
  }
  return all_pass ? 0 : 3;
}

struct BenchArgs {
  std::string results, truth, data, queries, out;
  int k = 4;
  double p = 1.0, psi = -1.0, level = -1.0;
};

void cmd_bench(const BenchArgs& a) {
  std::vector<json> results = read_jsonl(a.results);
  std::vector<json> truth = read_jsonl(a.truth);
  if (results.size() != truth.size()) {
    throw DataError("results and truth have different query counts");
  }

  json summary;
  summary["queries"] = results.size();
  double time_sum = 0.0;
  bool dslsh = !results.empty() && results.front().contains("outcome");

  if (dslsh) {
    int near = 0, exact_hits = 0, exact_known = 0;
    double level_sum = 0.0, scanned_sum = 0.0;
    for (size_t i = 0; i < results.size(); ++i) {
      const json& res = results[i];
      near += res["outcome"] == "NEAR";
      level_sum += res["stop_level"].get<double>();
      scanned_sum += res["scanned"].get<double>();
      time_sum += res["time_ms"].get<double>();
      int planted = truth[i]["planted"].get<int>();
      if (planted >= 0) {
        ++exact_known;
        exact_hits += res["witness"].get<int>() == planted;
      }
    }
    summary["near_rate"] = double(near) / results.size();
    summary["mean_stop_level"] = level_sum / results.size();
    summary["mean_scanned"] = scanned_sum / results.size();
    if (exact_known > 0) {
      summary["planted_witness_rate"] = double(exact_hits) / exact_known;
    }
  } else {
    int hits = 0, light = 0;
    double ratio_sum = 0.0;
    bool lightness = a.psi >= 0.0 && a.level >= 0.0;
    Dataset data, queries;
    if (lightness || !a.data.empty()) {
      if (a.data.empty() || a.queries.empty()) {
        throw ParamError("bench lightness needs --data and --queries");
      }
      data = read_dataset_file(a.data);
      queries = read_dataset_file(a.queries);
    }
    for (size_t i = 0; i < results.size(); ++i) {
      const json& res = results[i];
      int answer = res["answer"].get<int>();
      int planted = truth[i]["planted"].get<int>();
      double r = truth[i]["r"].get<double>();
      hits += answer == planted;
      time_sum += res["time_ms"].get<double>();
      if (r > 0) ratio_sum += res["distance"].get<double>() / r;
      if (lightness && answer >= 0) {
        Point residual = diff(queries.real[i], data.real[answer]);
        light += is_light(residual, {a.psi, a.level}, a.p);
      }
    }
    summary["recall"] = double(hits) / results.size();
    summary["mean_ratio"] = ratio_sum / results.size();
    if (lightness) {
      summary["light_fraction"] = double(light) / results.size();
    }
  }
  summary["mean_time_ms"] = time_sum / std::max<size_t>(1, results.size());

  auto out = open_out(a.out);
  out << summary.dump(2) << '\n';
  std::cout << summary.dump(2) << std::endl;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"robust nearest-neighbor toolkit"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* g = app.add_subcommand("gen", "generate a planted instance");
  g->add_option("--mode", gen.mode, "robust|budgeted|dslsh");
  g->add_option("--n", gen.n, "dataset size")->check(CLI::PositiveNumber);
  g->add_option("--d", gen.d, "dimension")->check(CLI::PositiveNumber);
  g->add_option("--k", gen.k, "robustness parameter");
  g->add_option("--r", gen.r, "planted distance / radius");
  g->add_option("--noise", gen.noise, "corruption magnitude");
  g->add_option("--p", gen.p, "norm exponent");
  g->add_option("--seed", gen.seed, "RNG seed");
  g->add_option("--queries", gen.queries, "number of queries");
  g->add_option("--out", gen.out, "output prefix")->required();
  g->add_option("--costs-profile", gen.costs_profile, "uniform|random|file");
  g->add_option("--costs-file", gen.costs_file, "cost CSV for --costs-profile file");
  g->add_option("--variant", gen.variant, "planted|growth|adversarial");

  BuildArgs build;
  CLI::App* b = app.add_subcommand("build", "build and serialize an index");
  b->add_option("--mode", build.mode, "robust|budgeted|dslsh");
  b->add_option("--data", build.data, "dataset file")->required();
  b->add_option("--out", build.out, "index file")->required();
  b->add_option("--costs", build.costs, "cost CSV (budgeted)");
  b->add_option("--seed", build.seed, "RNG seed");
  b->add_option("--k", build.k, "robustness parameter");
  b->add_option("--p", build.p, "norm exponent");
  b->add_option("--delta", build.delta, "substructure exponent in (0,1)");
  b->add_option("--c", build.c, "base ANN quality");
  b->add_option("--eps", build.eps, "approximation parameter");
  b->add_option("--L-scale", build.L_scale, "substructure count multiplier");
  b->add_option("--backend", build.backend, "exact|bitlsh");
  b->add_option("--approx", build.approx, "const|eps (robust mode)");
  b->add_option("--tables", build.tables, "bitlsh tables");
  b->add_option("--bits", build.bits, "bitlsh bits per hash");
  b->add_option("--buckets", build.buckets, "bitlsh discretization buckets");
  b->add_option("--r", build.r, "dslsh radius");
  b->add_option("--dup", build.dup, "dslsh duplication factor (0=auto)");
  b->add_option("--alpha", build.alpha, "dslsh table constant");
  b->add_option("--c3", build.c3, "dslsh escalation constant");
  b->add_flag("--early-exit", build.early_exit, "dslsh sampled early exit");

  QueryArgs query;
  CLI::App* q = app.add_subcommand("query", "run queries against an index");
  q->add_option("--index", query.index, "index file")->required();
  q->add_option("--queries", query.queries, "query file")->required();
  q->add_option("--out", query.out, "output records (jsonl)")->required();
  q->add_flag("--stats", query.stats, "include per-substructure stats");

  OracleArgs oracle;
  CLI::App* o = app.add_subcommand("oracle", "brute-force ground truth");
  o->add_option("--mode", oracle.mode, "robust|budgeted|dslsh");
  o->add_option("--data", oracle.data, "dataset file")->required();
  o->add_option("--queries", oracle.queries, "query file")->required();
  o->add_option("--out", oracle.out, "output records (jsonl)")->required();
  o->add_option("--costs", oracle.costs, "cost CSV (budgeted)");
  o->add_option("--k", oracle.k, "robustness parameter");
  o->add_option("--p", oracle.p, "norm exponent");
  o->add_option("--r", oracle.r, "dslsh radius");
  o->add_option("--eps", oracle.eps, "budgeted oracle approximation");

  LemmasArgs lemmas;
  CLI::App* l = app.add_subcommand("lemmas", "run the statistical suite");
  l->add_option("--seed", lemmas.seed, "RNG seed");
  l->add_option("--scale", lemmas.scale, "sample size scale in (0,1]");
  l->add_option("--out", lemmas.out, "output records (jsonl)");

  BenchArgs bench;
  CLI::App* be = app.add_subcommand("bench", "join results with ground truth");
  be->add_option("--results", bench.results, "query output (jsonl)")->required();
  be->add_option("--truth", bench.truth, "truth file (jsonl)")->required();
  be->add_option("--out", bench.out, "summary json")->required();
  be->add_option("--data", bench.data, "dataset file (for lightness)");
  be->add_option("--queries", bench.queries, "query file (for lightness)");
  be->add_option("--k", bench.k, "robustness parameter");
  be->add_option("--p", bench.p, "norm exponent");
  be->add_option("--psi", bench.psi, "lightness truncation threshold");
  be->add_option("--level", bench.level, "lightness level");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (g->parsed()) {
      cmd_gen(gen);
    } else if (b->parsed()) {
      cmd_build(build);
    } else if (q->parsed()) {
      cmd_query(query);
    } else if (o->parsed()) {
      cmd_oracle(oracle);
    } else if (l->parsed()) {
      return cmd_lemmas(lemmas);
    } else if (be->parsed()) {
      cmd_bench(bench);
    }
  } catch (const ParamError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

}  // namespace rann
