// coordsim: batch front end for polarization-set construction, rate/region
// tables, end-to-end coordination experiments and the exact tiny-N oracle.
//
// Exit codes: 0 ok (and feasible for `rates`), 2 config error,
// 3 decodability violation, 4 infeasible region, 5 runtime budget exceeded,
// 6 enumeration budget exceeded.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "coordsim/config.hpp"
#include "coordsim/records.hpp"
#include "coordsim/sim.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace coordsim;

namespace fs = std::filesystem;

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  uint64_t seed = 0;
  bool seed_set = false;
  int workers = 0;
  bool force = false;
};

fs::path cache_dir(const CommonOpts& opts) {
  if (const char* env = std::getenv("COORDSIM_CACHE_DIR")) return fs::path(env);
  return fs::path(opts.out_dir);
}

CliConfig resolve_config(const CommonOpts& opts) {
  CliConfig cli = load_config(opts.config_path);
  if (opts.seed_set) cli.experiment.seed = opts.seed;
  cli.experiment.workers = opts.workers;
#ifdef _OPENMP
  if (opts.workers > 0) omp_set_num_threads(opts.workers);
#endif
  return cli;
}

uint64_t cache_key(const ExperimentConfig& cfg) {
  return fnv1a64(construction_fingerprint(cfg));
}

// Load the construction from cache, or build and cache it.
BuildArtifacts cached_artifacts(const ExperimentConfig& cfg, const CommonOpts& opts,
                                bool* hit = nullptr) {
  const uint64_t key = cache_key(cfg);
  char name[64];
  std::snprintf(name, sizeof name, "sets_%016llx.json", static_cast<unsigned long long>(key));
  const fs::path path = cache_dir(opts) / name;
  if (fs::exists(path)) {
    std::ifstream in(path);
    nlohmann::json j;
    in >> j;
    if (j.value("cache_key", uint64_t{0}) == key) {
      if (hit) *hit = true;
      return artifacts_from_json(j);
    }
  }
  if (hit) *hit = false;
  BuildArtifacts art = build_artifacts(cfg);
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  atomic_write(path, artifacts_to_json(art, key).dump(2) + "\n");
  return art;
}

void print_set_table(const BuildArtifacts& art) {
  const SetFamily& f = art.family;
  auto row = [](const char* name, int count) { std::printf("  %-9s %6d\n", name, count); };
  std::printf("index sets (N = %d):\n", 1 << f.n);
  row("V_C", f.v_c.count());
  row("V_C|X", f.v_c_x.count());
  row("V_C|XY", f.v_c_xy.count());
  row("H_C|B", f.h_c_b.count());
  row("H_C|A", f.h_c_a.count());
  row("V_A", f.v_a.count());
  row("V_A|C", f.v_a_c.count());
  row("V_A|CX", f.v_a_cx.count());
  row("V_A|CXY", f.v_a_cxy.count());
  row("V_Y|BC", f.v_y_bc.count());
  std::printf("partition:\n");
  row("F1", f.f1.count());
  row("F2", f.f2.count());
  row("F3", f.f3.count());
  row("F4", f.f4.count());
  row("F4hat", f.f4hat.count());
  row("F4check", f.f4check.count());
  row("F5", f.f5.count());
  row("F6", f.f6.count());
  row("F7", f.f7.count());
  row("F8", f.f8.count());
  row("F9", f.f9.count());
  std::printf("chaining: |F31|=%d |F32|=%d  pools: |J_i|=%d |J1bar|=%d |J2bar|=%d |M1_i|=%d\n",
              art.layout.f31_size, art.layout.f32_size, art.layout.j_block_bits,
              art.layout.j1_bar_bits, art.layout.j2_bar_bits, art.layout.m1_block_bits);
}

void print_rate_table(const CodeRates& r, const RegionReport& g) {
  std::printf("rates: R_o=%.6f R_c=%.6f R_a=%.6f rho1=%.6f rho2=%.6f\n", r.r_o, r.r_c, r.r_a,
              r.rho1, r.rho2);
  std::printf("info:  I(XY;AC)=%.6f I(XY;C)=%.6f I(X;AC)=%.6f I(X;C)=%.6f I(B;C)=%.6f "
              "H(Y|BC)=%.6f\n",
              g.i_xy_ac, g.i_xy_c, g.i_x_ac, g.i_x_c, g.i_b_c, g.h_y_bc);
  const char* names[7] = {"(a) Ra+Ro+Rc>I(XY;AC)", "(b) Ro+Rc>I(XY;C)", "(c) Ra+Rc>I(X;AC)",
                          "(d) Rc>I(X;C)",         "(e) Rc<I(B;C)",     "(f) rho1 bound",
                          "(g) rho2>H(Y|BC)"};
  for (int i = 0; i < 7; ++i)
    std::printf("  margin %-22s % .6f %s\n", names[i], g.margins[i],
                g.margins[i] > 0 ? "ok" : "VIOLATED");
  if (g.rc_conflict)
    std::printf("  conflict: I(X;C) >= I(B;C); no R_c can satisfy both (d) and (e)\n");
  std::printf("region: %s\n", g.feasible ? "feasible" : "infeasible");
}

int cmd_sets(const CommonOpts& opts) {
  CliConfig cli = resolve_config(opts);
  bool hit = false;
  BuildArtifacts art = cached_artifacts(cli.experiment, opts, &hit);
  std::printf("%s\n", hit ? "cache hit" : "cache miss (built)");
  print_set_table(art);
  CodeRates r = code_rates(art.family, art.layout, cli.experiment.k, 1 << cli.experiment.n);
  RegionReport g = region_check(cli.experiment.sys, r);
  print_rate_table(r, g);
  return 0;
}

int cmd_rates(const CommonOpts& opts) {
  CliConfig cli = resolve_config(opts);
  BuildArtifacts art = cached_artifacts(cli.experiment, opts);
  CodeRates r = code_rates(art.family, art.layout, cli.experiment.k, 1 << cli.experiment.n);
  RegionReport g = region_check(cli.experiment.sys, r);
  print_rate_table(r, g);
  atomic_write(fs::path(opts.out_dir) / "rates.csv",
               report_csv_header() + rates_csv_row(cli.experiment, r, g));
  return g.feasible ? 0 : 4;
}

int cmd_simulate(const CommonOpts& opts) {
  CliConfig cli = resolve_config(opts);
  cli.experiment.keep_block_traces = cli.export_traces;
  BuildArtifacts art = cached_artifacts(cli.experiment, opts);
  CodeRates r = code_rates(art.family, art.layout, cli.experiment.k, 1 << cli.experiment.n);
  RegionReport g = region_check(cli.experiment.sys, r);
  if (!g.feasible && !opts.force) {
    print_rate_table(r, g);
    std::fprintf(stderr, "region infeasible at the achieved rates; use --force to run anyway\n");
    return 4;
  }
  SimReport rep = run_experiment(cli.experiment, art);
  std::printf("trials=%d pooled_pairs=%ld tv=%.6f kl=%.6f\n", rep.trials, rep.pooled_pairs,
              rep.tv, rep.kl);
  print_rate_table(rep.rates, rep.region);
  std::fprintf(stderr, "runtime: %.2fs\n", rep.runtime_seconds);
  atomic_write(fs::path(opts.out_dir) / "report.json", report_to_json(rep).dump(2) + "\n");
  atomic_write(fs::path(opts.out_dir) / "report.csv",
               report_csv_header() + report_csv_row(cli.experiment, rep));
  if (cli.export_traces) {
    std::string lines;
    for (std::size_t t = 0; t < rep.block_traces.size(); ++t)
      for (std::size_t blk = 0; blk < rep.block_traces[t].size(); ++blk) {
        nlohmann::json rec = block_trace_to_json(rep.block_traces[t][blk], static_cast<int>(t),
                                                 static_cast<int>(blk));
        rec["x"] = hex_pack(rep.xy_blocks[t][blk].first);
        lines += rec.dump() + "\n";
      }
    atomic_write(fs::path(opts.out_dir) / "traces.jsonl", lines);
  }
  return 0;
}

int cmd_oracle(const CommonOpts& opts) {
  CliConfig cli = resolve_config(opts);
  if (cli.experiment.n > 2 || cli.experiment.k != 1) {
    std::fprintf(stderr, "oracle requires n <= 2 and k = 1\n");
    return 6;
  }
  BuildArtifacts art = cached_artifacts(cli.experiment, opts);
  JointPmf oracle = exhaustive_oracle(cli.experiment, art);
  JointPmf emp = empirical_word_joint(cli.experiment, art, cli.experiment.trials);
  JointPmf target = target_word_joint(cli.experiment.sys, 1 << cli.experiment.n);
  const double tv_emp = total_variation(oracle, emp);
  const double tv_target = total_variation(oracle, target);
  std::printf("oracle support=%zu  TV(oracle, empirical)=%.6f  TV(oracle, target)=%.6f\n",
              oracle.table().size(), tv_emp, tv_target);
  nlohmann::json out{{"kind", "coordsim.oracle"},
                     {"version", kRecordVersion},
                     {"oracle", oracle.table()},
                     {"empirical", emp.table()},
                     {"target", target.table()},
                     {"tv_oracle_empirical", tv_emp},
                     {"tv_oracle_target", tv_target},
                     {"trials", cli.experiment.trials}};
  atomic_write(fs::path(opts.out_dir) / "oracle.json", out.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coordsim: nested polar coding for strong coordination over noisy channels"};
  app.require_subcommand(1);

  CommonOpts opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "configuration file")->required();
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--seed", opts.seed, "override [run] seed")->each([&](const std::string&) {
      opts.seed_set = true;
    });
    sub->add_option("--workers", opts.workers, "cap parallel workers (0 = all)");
    sub->add_flag("--force", opts.force, "run even if the rate region is infeasible");
  };
  CLI::App* sets = app.add_subcommand("sets", "build and cache polarization sets");
  CLI::App* rates = app.add_subcommand("rates", "rate and region table");
  CLI::App* simulate = app.add_subcommand("simulate", "run the coordination experiment");
  CLI::App* oracle = app.add_subcommand("oracle", "exact tiny-N induced joint vs Monte-Carlo");
  for (CLI::App* sub : {sets, rates, simulate, oracle}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  try {
    std::filesystem::create_directories(opts.out_dir);
    if (sets->parsed()) return cmd_sets(opts);
    if (rates->parsed()) return cmd_rates(opts);
    if (simulate->parsed()) return cmd_simulate(opts);
    if (oracle->parsed()) return cmd_oracle(opts);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const DecodabilityError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 3;
  } catch (const BudgetExceededError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 5;
  } catch (const EnumerationBudgetError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 6;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
