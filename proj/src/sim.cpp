#include "coordsim/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace coordsim {

BuildArtifacts build_artifacts(const ExperimentConfig& cfg) {
  BuildArtifacts art;
  art.spectrum = build_spectrum(cfg.sys, cfg.n, cfg.spectrum_samples, cfg.construction_seed);
  art.family = derive_partition(threshold_sets(art.spectrum, cfg.eps_vh, cfg.eps_h));
  art.layout = chain_layout(art.family, cfg.k);
  return art;
}

namespace {

std::size_t icdf(const Pmf& p, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return i;
  }
  return p.size() - 1;
}

}  // namespace

Word dmc_transmit(const Word& a, const Channel& ch, uint64_t seed, uint64_t block_tag) {
  Word b(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] >= ch.input_size()) throw std::invalid_argument("dmc_transmit: symbol out of alphabet");
    b[i] = static_cast<uint8_t>(
        icdf(ch.row(a[i]), keyed_unit(seed, Stream::channel, block_tag, static_cast<uint64_t>(i))));
  }
  return b;
}

std::vector<uint8_t> side_channel_roundtrip(const std::vector<uint8_t>& payload, const Channel& ch,
                                            SideChannelMode mode, int repeats, uint64_t seed) {
  if (mode == SideChannelMode::ideal) return payload;
  if (repeats < 1 || ch.input_size() < 2)
    throw std::invalid_argument("side_channel_roundtrip: bad repetition setup");
  std::vector<uint8_t> decoded(payload.size());
  for (std::size_t t = 0; t < payload.size(); ++t) {
    double score0 = 0.0, score1 = 0.0;  // log-likelihoods
    for (int r = 0; r < repeats; ++r) {
      const std::size_t b = icdf(ch.row(payload[t]),
                                 keyed_unit(seed, Stream::side_channel, static_cast<uint64_t>(t),
                                            static_cast<uint64_t>(r)));
      score0 += std::log(std::max(ch.prob(b, 0), 1e-300));
      score1 += std::log(std::max(ch.prob(b, 1), 1e-300));
    }
    decoded[t] = score1 > score0 ? 1 : 0;
  }
  return decoded;
}

CodeRates code_rates(const SetFamily& fam, const ChainLayout& layout, int k, int N) {
  if (k < 1 || N < 1) throw std::invalid_argument("code_rates: bad k or N");
  CodeRates r;
  const double kn = static_cast<double>(k) * N;
  r.r_o = (fam.v_c_xy.count() + static_cast<double>(k) * fam.v_c_x.minus(fam.v_c_xy).count()) / kn;
  r.r_c = static_cast<double>(fam.f5.unite(fam.f3).count()) / N;
  r.r_a = (fam.v_a_cxy.count() + static_cast<double>(k) * fam.f8.count()) / kn;
  r.rho1 = static_cast<double>(fam.f6.count()) / N;
  r.rho2 = static_cast<double>(fam.v_y_bc.count()) / N;
  (void)layout;
  return r;
}

RegionReport region_check(const CoordinationSystem& sys, const CodeRates& r) {
  const JointPmf full = compose_joint(sys);
  RegionReport rep;
  rep.i_xy_ac = mutual_information(full, {"X", "Y"}, {"A", "C"});
  rep.i_xy_c = mutual_information(full, {"X", "Y"}, {"C"});
  rep.i_x_ac = mutual_information(full, {"X"}, {"A", "C"});
  rep.i_x_c = mutual_information(full, {"X"}, {"C"});
  rep.i_b_c = mutual_information(full, {"B"}, {"C"});
  rep.h_y_bc = conditional_entropy(full, {"Y"}, {"B", "C"});
  rep.margins[0] = r.r_a + r.r_o + r.r_c - rep.i_xy_ac;
  rep.margins[1] = r.r_o + r.r_c - rep.i_xy_c;
  rep.margins[2] = r.r_a + r.r_c - rep.i_x_ac;
  rep.margins[3] = r.r_c - rep.i_x_c;
  rep.margins[4] = rep.i_b_c - r.r_c;
  rep.margins[5] = r.rho1 - (r.r_a + r.r_c - rep.i_x_ac);
  rep.margins[6] = r.rho2 - rep.h_y_bc;
  rep.feasible = true;
  for (double m : rep.margins)
    if (!(m > 0.0)) rep.feasible = false;
  rep.rc_conflict = rep.i_x_c >= rep.i_b_c;
  return rep;
}

namespace {

struct TrialAccumulator {
  std::vector<long> sym_counts;               // x * ny + y
  std::vector<std::vector<long>> block_counts;
  CodecCounters counters;
  long common_bits = 0;
  long m1_bits = 0;
  long payload_bits = 0;

  TrialAccumulator(std::size_t cells, int k)
      : sym_counts(cells, 0), block_counts(static_cast<std::size_t>(k), std::vector<long>(cells, 0)) {}

  void merge(const TrialAccumulator& o) {
    for (std::size_t i = 0; i < sym_counts.size(); ++i) sym_counts[i] += o.sym_counts[i];
    for (std::size_t b = 0; b < block_counts.size(); ++b)
      for (std::size_t i = 0; i < sym_counts.size(); ++i)
        block_counts[b][i] += o.block_counts[b][i];
    counters.u2_x_draws += o.counters.u2_x_draws;
    counters.u2_prior_draws += o.counters.u2_prior_draws;
    counters.u1_cx_draws += o.counters.u1_cx_draws;
    counters.u1_c_draws += o.counters.u1_c_draws;
    counters.u1_prior_draws += o.counters.u1_prior_draws;
    counters.dec_side_draws += o.counters.dec_side_draws;
    counters.dec_prior_draws += o.counters.dec_prior_draws;
    counters.m2_uniform_draws += o.counters.m2_uniform_draws;
    counters.synth_posterior_draws += o.counters.synth_posterior_draws;
    common_bits += o.common_bits;
    m1_bits += o.m1_bits;
    payload_bits += o.payload_bits;
  }
};

void run_trial(const ExperimentConfig& cfg, const CodecContext& ctx, const Pmf& q_x, int trial,
               TrialAccumulator& acc, std::vector<std::pair<Word, Word>>& xy_out,
               std::vector<BlockTrace>* trace_out) {
  const uint64_t trial_seed = keyed_u64(cfg.seed, Stream::trial, static_cast<uint64_t>(trial), 1);
  RandomnessPools pools = make_pools(*ctx.layout, trial_seed);
  const int len = ctx.len;
  const std::size_t ny = cfg.sys.y_size();

  std::vector<Word> x_blocks(static_cast<std::size_t>(cfg.k));
  for (int blk = 0; blk < cfg.k; ++blk) {
    Word x(static_cast<std::size_t>(len));
    for (int l = 0; l < len; ++l)
      x[static_cast<std::size_t>(l)] = static_cast<uint8_t>(
          icdf(q_x, keyed_unit(trial_seed, Stream::source, static_cast<uint64_t>(blk + 1),
                               static_cast<uint64_t>(l))));
    x_blocks[static_cast<std::size_t>(blk)] = std::move(x);
  }

  CodecCounters counters;
  EncodeRunResult enc = encode_run(ctx, x_blocks, pools, counters);
  std::vector<Word> b_blocks(static_cast<std::size_t>(cfg.k));
  for (int blk = 0; blk < cfg.k; ++blk)
    b_blocks[static_cast<std::size_t>(blk)] = dmc_transmit(
        enc.a_blocks[static_cast<std::size_t>(blk)], cfg.sys.p_b_given_a(), trial_seed,
        static_cast<uint64_t>(blk + 1));
  const std::vector<uint8_t> payload = side_channel_roundtrip(
      enc.final_f3_payload, cfg.sys.p_b_given_a(), cfg.sidechannel, cfg.side_repeats, trial_seed);
  DecodeRunResult dec =
      decode_run(ctx, b_blocks, payload, pools, cfg.mode, cfg.paper_step4, counters);

  for (int blk = 0; blk < cfg.k; ++blk) {
    const Word& x = x_blocks[static_cast<std::size_t>(blk)];
    const Word& y = dec.y_blocks[static_cast<std::size_t>(blk)];
    for (int l = 0; l < len; ++l) {
      const std::size_t cell = x[static_cast<std::size_t>(l)] * ny + y[static_cast<std::size_t>(l)];
      ++acc.sym_counts[cell];
      ++acc.block_counts[static_cast<std::size_t>(blk)][cell];
    }
    xy_out[static_cast<std::size_t>(blk)] = {x, y};
    if (trace_out) {
      BlockTrace trace = std::move(enc.traces[static_cast<std::size_t>(blk)]);
      trace.b = b_blocks[static_cast<std::size_t>(blk)];
      trace.u2_hat = dec.u2_hats[static_cast<std::size_t>(blk)];
      trace.c_hat = dec.c_hats[static_cast<std::size_t>(blk)];
      trace.t = dec.t_words[static_cast<std::size_t>(blk)];
      trace.y = y;
      (*trace_out)[static_cast<std::size_t>(blk)] = std::move(trace);
    }
  }
  acc.counters.u2_x_draws += counters.u2_x_draws;
  acc.counters.u2_prior_draws += counters.u2_prior_draws;
  acc.counters.u1_cx_draws += counters.u1_cx_draws;
  acc.counters.u1_c_draws += counters.u1_c_draws;
  acc.counters.u1_prior_draws += counters.u1_prior_draws;
  acc.counters.dec_side_draws += counters.dec_side_draws;
  acc.counters.dec_prior_draws += counters.dec_prior_draws;
  acc.counters.m2_uniform_draws += counters.m2_uniform_draws;
  acc.counters.synth_posterior_draws += counters.synth_posterior_draws;
  acc.common_bits += pools.common_bits_touched();
  acc.m1_bits += pools.m1_bits_touched();
  acc.payload_bits += static_cast<long>(enc.final_f3_payload.size());
}

SimReport assemble_report(const ExperimentConfig& cfg, const BuildArtifacts& art,
                          const TrialAccumulator& acc,
                          std::vector<std::vector<std::pair<Word, Word>>> xy_blocks,
                          std::vector<std::vector<BlockTrace>> block_traces,
                          double runtime_seconds) {
  SimReport rep;
  rep.rates = code_rates(art.family, art.layout, cfg.k, 1 << cfg.n);
  rep.region = region_check(cfg.sys, rep.rates);
  const std::vector<double>& target = cfg.sys.q_xy().table();
  const std::size_t cells = target.size();
  long total = 0;
  for (long c : acc.sym_counts) total += c;
  rep.pooled_pairs = total;
  rep.empirical_xy.assign(cells, 0.0);
  for (std::size_t i = 0; i < cells; ++i)
    rep.empirical_xy[i] = total > 0 ? static_cast<double>(acc.sym_counts[i]) / total : 0.0;

  double tv = 0.0;
  for (std::size_t i = 0; i < cells; ++i) tv += std::abs(rep.empirical_xy[i] - target[i]);
  rep.tv = 0.5 * tv;

  std::vector<double> smoothed(cells);
  const double denom = static_cast<double>(total) + 0.5 * static_cast<double>(cells);
  for (std::size_t i = 0; i < cells; ++i)
    smoothed[i] = (static_cast<double>(acc.sym_counts[i]) + 0.5) / denom;
  rep.kl = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    if (smoothed[i] == 0.0) continue;
    if (target[i] == 0.0) {
      rep.kl = std::numeric_limits<double>::infinity();
      break;
    }
    rep.kl += smoothed[i] * std::log2(smoothed[i] / target[i]);
  }

  rep.per_block_tv.assign(static_cast<std::size_t>(cfg.k), 0.0);
  for (int b = 0; b < cfg.k; ++b) {
    long bt = 0;
    for (long c : acc.block_counts[static_cast<std::size_t>(b)]) bt += c;
    double btv = 0.0;
    for (std::size_t i = 0; i < cells; ++i)
      btv += std::abs((bt > 0 ? static_cast<double>(
                                    acc.block_counts[static_cast<std::size_t>(b)][i]) / bt
                              : 0.0) -
                      target[i]);
    rep.per_block_tv[static_cast<std::size_t>(b)] = 0.5 * btv;
  }

  rep.common_bits = acc.common_bits;
  rep.m1_bits = acc.m1_bits;
  rep.m2_draws = acc.counters.m2_uniform_draws;
  rep.u2_x_draws = acc.counters.u2_x_draws;
  rep.u1_cx_draws = acc.counters.u1_cx_draws;
  rep.side_payload_bits = acc.payload_bits;
  rep.side_overhead_per_action =
      static_cast<double>(art.family.f3.count()) / (static_cast<double>(cfg.k) * (1 << cfg.n));
  rep.trials = cfg.trials;
  rep.seed = cfg.seed;
  rep.runtime_seconds = runtime_seconds;
  rep.xy_blocks = std::move(xy_blocks);
  rep.block_traces = std::move(block_traces);
  return rep;
}

}  // namespace

SimReport run_experiment_serial(const ExperimentConfig& cfg, const BuildArtifacts& art) {
  if (cfg.trials < 1) throw std::invalid_argument("run_experiment: trials must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  const CodecContext ctx(cfg.sys, art.family, art.layout);
  const Pmf q_x = cfg.sys.q_xy().marginal({"X"}).flatten();
  const std::size_t cells = cfg.sys.x_size() * cfg.sys.y_size();
  TrialAccumulator acc(cells, cfg.k);
  std::vector<std::vector<std::pair<Word, Word>>> xy_blocks(
      static_cast<std::size_t>(cfg.trials),
      std::vector<std::pair<Word, Word>>(static_cast<std::size_t>(cfg.k)));
  std::vector<std::vector<BlockTrace>> traces;
  if (cfg.keep_block_traces)
    traces.assign(static_cast<std::size_t>(cfg.trials),
                  std::vector<BlockTrace>(static_cast<std::size_t>(cfg.k)));
  for (int t = 0; t < cfg.trials; ++t) {
    if (cfg.budget_seconds > 0.0) {
      const double elapsed =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (elapsed > cfg.budget_seconds)
        throw BudgetExceededError("run_experiment: runtime budget exceeded");
    }
    run_trial(cfg, ctx, q_x, t, acc, xy_blocks[static_cast<std::size_t>(t)],
              cfg.keep_block_traces ? &traces[static_cast<std::size_t>(t)] : nullptr);
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return assemble_report(cfg, art, acc, std::move(xy_blocks), std::move(traces), secs);
}

SimReport run_experiment(const ExperimentConfig& cfg, const BuildArtifacts& art) {
  if (cfg.trials < 1) throw std::invalid_argument("run_experiment: trials must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  const CodecContext ctx(cfg.sys, art.family, art.layout);
  const Pmf q_x = cfg.sys.q_xy().marginal({"X"}).flatten();
  const std::size_t cells = cfg.sys.x_size() * cfg.sys.y_size();
  TrialAccumulator acc(cells, cfg.k);
  std::vector<std::vector<std::pair<Word, Word>>> xy_blocks(
      static_cast<std::size_t>(cfg.trials),
      std::vector<std::pair<Word, Word>>(static_cast<std::size_t>(cfg.k)));
  std::vector<std::vector<BlockTrace>> traces;
  if (cfg.keep_block_traces)
    traces.assign(static_cast<std::size_t>(cfg.trials),
                  std::vector<BlockTrace>(static_cast<std::size_t>(cfg.k)));

#ifdef _OPENMP
  if (cfg.workers > 0) omp_set_num_threads(cfg.workers);
#endif
  bool out_of_time = false;
#pragma omp parallel
  {
    TrialAccumulator local(cells, cfg.k);
#pragma omp for schedule(dynamic, 4)
    for (int t = 0; t < cfg.trials; ++t) {
      bool skip;
#pragma omp atomic read
      skip = out_of_time;
      if (!skip && cfg.budget_seconds > 0.0) {
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (elapsed > cfg.budget_seconds) {
#pragma omp atomic write
          out_of_time = true;
          skip = true;
        }
      }
      if (!skip)
        run_trial(cfg, ctx, q_x, t, local, xy_blocks[static_cast<std::size_t>(t)],
                  cfg.keep_block_traces ? &traces[static_cast<std::size_t>(t)] : nullptr);
    }
#pragma omp critical
    acc.merge(local);
  }
  if (out_of_time) throw BudgetExceededError("run_experiment: runtime budget exceeded");
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return assemble_report(cfg, art, acc, std::move(xy_blocks), std::move(traces), secs);
}

SimReport run_experiment(const ExperimentConfig& cfg) {
  return run_experiment(cfg, build_artifacts(cfg));
}

namespace {

// Exact posterior P(U_j = 1 | u_{0..j-1}, leaves) by direct enumeration of
// the remaining bits.  Independent of the SC recursion on purpose: the oracle
// must not share the implementation path it certifies.
double bf_posterior(const std::vector<std::array<double, 2>>& leaves, const BitWord& prefix_bits,
                    int j) {
  const int len = static_cast<int>(leaves.size());
  BitWord u(static_cast<std::size_t>(len), 0);
  for (int i = 0; i < j; ++i) u[static_cast<std::size_t>(i)] = prefix_bits[static_cast<std::size_t>(i)];
  const int free_bits = len - j;
  double w0 = 0.0, w1 = 0.0;
  for (uint32_t mask = 0; mask < (1u << free_bits); ++mask) {
    for (int t = 0; t < free_bits; ++t)
      u[static_cast<std::size_t>(j + t)] = static_cast<uint8_t>((mask >> t) & 1u);
    const BitWord v = polar_transform(u);
    double p = 1.0;
    for (int i = 0; i < len && p > 0.0; ++i)
      p *= leaves[static_cast<std::size_t>(i)][v[static_cast<std::size_t>(i)]];
    if (u[static_cast<std::size_t>(j)])
      w1 += p;
    else
      w0 += p;
  }
  const double s = w0 + w1;
  return s > 0.0 ? w1 / s : 0.5;
}

struct OracleWalker {
  const ExperimentConfig& cfg;
  const CodecContext& ctx;
  long budget;
  long visits = 0;

  int len;
  std::size_t nx, ny, nb;
  Pmf q_x;
  std::vector<std::array<double, 2>> prior_leaves, x_leaves, b_leaves, y_leaves;
  std::vector<std::array<double, 2>> a_prior_leaves, a_c_leaves, a_cx_leaves;

  Word x, a, b;
  BitWord u2, u1, u2h, t;
  std::vector<double> enc_p;  // posterior used by the encoder draw at each U2 index
  std::vector<uint8_t> jbits, j1bits, j2bits, m1bits;
  std::vector<double> result;

  OracleWalker(const ExperimentConfig& c, const CodecContext& cc, long b_)
      : cfg(c), ctx(cc), budget(b_), len(cc.len), nx(c.sys.x_size()), ny(c.sys.y_size()),
        nb(c.sys.b_size()), q_x(c.sys.q_xy().marginal({"X"}).flatten()) {
    x.assign(static_cast<std::size_t>(len), 0);
    a.assign(static_cast<std::size_t>(len), 0);
    b.assign(static_cast<std::size_t>(len), 0);
    u2.assign(static_cast<std::size_t>(len), 0);
    u1.assign(static_cast<std::size_t>(len), 0);
    u2h.assign(static_cast<std::size_t>(len), 0);
    t.assign(static_cast<std::size_t>(len), 0);
    enc_p.assign(static_cast<std::size_t>(len), -1.0);
    prior_leaves.assign(static_cast<std::size_t>(len), ctx.c_prior);
    a_prior_leaves.assign(static_cast<std::size_t>(len), ctx.a_prior);
    x_leaves.resize(static_cast<std::size_t>(len));
    b_leaves.resize(static_cast<std::size_t>(len));
    y_leaves.resize(static_cast<std::size_t>(len));
    a_c_leaves.resize(static_cast<std::size_t>(len));
    a_cx_leaves.resize(static_cast<std::size_t>(len));
    std::size_t words_x = 1, words_y = 1;
    for (int i = 0; i < len; ++i) {
      words_x *= nx;
      words_y *= ny;
    }
    result.assign(words_x * words_y, 0.0);
  }

  void tick() {
    if (++visits > budget) throw EnumerationBudgetError("exhaustive_oracle: enumeration budget exceeded");
  }

  std::size_t word_index(const Word& w, std::size_t radix) const {
    std::size_t idx = 0;
    for (int i = 0; i < len; ++i) idx = idx * radix + w[static_cast<std::size_t>(i)];
    return idx;
  }

  void run() {
    const std::size_t jb = static_cast<std::size_t>(ctx.layout->j_block_bits);
    const std::size_t j1 = static_cast<std::size_t>(ctx.layout->j1_bar_bits);
    const std::size_t j2 = static_cast<std::size_t>(ctx.layout->j2_bar_bits);
    const std::size_t m1 = static_cast<std::size_t>(ctx.layout->m1_block_bits);
    const std::size_t pool_bits = jb + j1 + j2 + m1;
    if (pool_bits > 24) throw EnumerationBudgetError("exhaustive_oracle: pool space too large");
    jbits.assign(jb, 0);
    j1bits.assign(j1, 0);
    j2bits.assign(j2, 0);
    m1bits.assign(m1, 0);

    std::size_t words_x = 1;
    for (int i = 0; i < len; ++i) words_x *= nx;
    const double pool_w = std::pow(0.5, static_cast<double>(pool_bits));
    for (std::size_t xw = 0; xw < words_x; ++xw) {
      std::size_t rem = xw;
      double wx = 1.0;
      for (int i = len - 1; i >= 0; --i) {
        x[static_cast<std::size_t>(i)] = static_cast<uint8_t>(rem % nx);
        rem /= nx;
        wx *= q_x[x[static_cast<std::size_t>(i)]];
      }
      if (wx == 0.0) continue;
      for (int i = 0; i < len; ++i)
        x_leaves[static_cast<std::size_t>(i)] = ctx.c_given_x.at(x[static_cast<std::size_t>(i)]);
      for (uint64_t mask = 0; mask < (uint64_t{1} << pool_bits); ++mask) {
        tick();
        uint64_t m = mask;
        for (std::size_t i = 0; i < jb; ++i, m >>= 1) jbits[i] = m & 1;
        for (std::size_t i = 0; i < j1; ++i, m >>= 1) j1bits[i] = m & 1;
        for (std::size_t i = 0; i < j2; ++i, m >>= 1) j2bits[i] = m & 1;
        for (std::size_t i = 0; i < m1; ++i, m >>= 1) m1bits[i] = m & 1;
        enc_u2(0, wx * pool_w);
      }
    }
  }

  // Encoder block 1: full pool maps, draws at F3 u F5 (x-conditioned) and the
  // complement (prior).
  void enc_u2(int j, double w) {
    if (w == 0.0) return;
    if (j == len) {
      enc_u1(0, w);
      return;
    }
    tick();
    int frozen = -1;
    for (std::size_t s = 0; s < ctx.pj_full.size(); ++s)
      if (ctx.pj_full[s] == j) frozen = jbits[s];
    for (std::size_t s = 0; s < ctx.pj1_full.size(); ++s)
      if (ctx.pj1_full[s] == j) frozen = j1bits[s];
    if (frozen >= 0) {
      u2[static_cast<std::size_t>(j)] = static_cast<uint8_t>(frozen);
      enc_p[static_cast<std::size_t>(j)] = -1.0;
      enc_u2(j + 1, w);
      return;
    }
    const uint8_t cls = ctx.u2_class[static_cast<std::size_t>(j)];
    const double p = (cls == 1 || cls == 2) ? bf_posterior(x_leaves, u2, j)
                                            : bf_posterior(prior_leaves, u2, j);
    enc_p[static_cast<std::size_t>(j)] = p;
    if (p < 1.0) {
      u2[static_cast<std::size_t>(j)] = 0;
      enc_u2(j + 1, w * (1.0 - p));
    }
    if (p > 0.0) {
      u2[static_cast<std::size_t>(j)] = 1;
      enc_u2(j + 1, w * p);
    }
    u2[static_cast<std::size_t>(j)] = 0;
    enc_p[static_cast<std::size_t>(j)] = -1.0;
  }

  void enc_u1(int, double w) {
    const BitWord c = polar_transform(u2);
    for (int i = 0; i < len; ++i) {
      const std::size_t ci = c[static_cast<std::size_t>(i)];
      a_c_leaves[static_cast<std::size_t>(i)] = ctx.a_given_c.at(ci);
      a_cx_leaves[static_cast<std::size_t>(i)] =
          ctx.a_given_cx.at(ci * nx + x[static_cast<std::size_t>(i)]);
    }
    enc_u1_walk(0, w);
  }

  void enc_u1_walk(int j, double w) {
    if (w == 0.0) return;
    if (j == len) {
      const BitWord a_bits = polar_transform(u1);
      for (int i = 0; i < len; ++i) a[static_cast<std::size_t>(i)] = a_bits[static_cast<std::size_t>(i)];
      channel(0, w);
      return;
    }
    tick();
    int frozen = -1;
    for (std::size_t s = 0; s < ctx.f6_positions.size(); ++s)
      if (ctx.f6_positions[s] == j) frozen = m1bits[s];
    for (std::size_t s = 0; s < ctx.f7_positions.size(); ++s)
      if (ctx.f7_positions[s] == j) frozen = j2bits[s];
    if (frozen >= 0) {
      u1[static_cast<std::size_t>(j)] = static_cast<uint8_t>(frozen);
      enc_u1_walk(j + 1, w);
      return;
    }
    const uint8_t cls = ctx.u1_class[static_cast<std::size_t>(j)];
    const double p = cls == 2   ? bf_posterior(a_cx_leaves, u1, j)
                     : cls == 3 ? bf_posterior(a_c_leaves, u1, j)
                                : bf_posterior(a_prior_leaves, u1, j);
    if (p < 1.0) {
      u1[static_cast<std::size_t>(j)] = 0;
      enc_u1_walk(j + 1, w * (1.0 - p));
    }
    if (p > 0.0) {
      u1[static_cast<std::size_t>(j)] = 1;
      enc_u1_walk(j + 1, w * p);
    }
    u1[static_cast<std::size_t>(j)] = 0;
  }

  void channel(int pos, double w) {
    if (w == 0.0) return;
    if (pos == len) {
      for (int i = 0; i < len; ++i)
        b_leaves[static_cast<std::size_t>(i)] = ctx.c_given_b.at(b[static_cast<std::size_t>(i)]);
      dec_u2(0, w);
      return;
    }
    tick();
    for (std::size_t sym = 0; sym < nb; ++sym) {
      const double pw = cfg.sys.p_b_given_a().prob(sym, a[static_cast<std::size_t>(pos)]);
      if (pw == 0.0) continue;
      b[static_cast<std::size_t>(pos)] = static_cast<uint8_t>(sym);
      channel(pos + 1, w * pw);
    }
    b[static_cast<std::size_t>(pos)] = 0;
  }

  // Decoder, block 1 of 1.  The F3 payload is the encoder's F3 bits (ideal
  // side channel).  Decoder draws at the complement re-use the encoder's
  // keyed uniforms, hence the exact monotone coupling below.
  void dec_u2(int j, double w) {
    if (w == 0.0) return;
    if (j == len) {
      dec_finish(w);
      return;
    }
    tick();
    int frozen = -1;
    if (!cfg.paper_step4) {
      for (std::size_t s = 0; s < ctx.pj_full.size(); ++s)
        if (ctx.pj_full[s] == j) frozen = jbits[s];
      for (std::size_t s = 0; s < ctx.pj1_full.size(); ++s)
        if (ctx.pj1_full[s] == j) frozen = j1bits[s];
    } else {
      for (std::size_t s = 0; s < ctx.pj_split.size(); ++s)
        if (ctx.pj_split[s] == j) frozen = jbits[s];
      for (std::size_t s = 0; s < ctx.pj1_split.size(); ++s)
        if (ctx.pj1_split[s] == j) frozen = j1bits[s];
    }
    const uint8_t cls = ctx.u2_class[static_cast<std::size_t>(j)];
    if (cls == 1) frozen = u2[static_cast<std::size_t>(j)];  // F3 via the ideal payload
    if (frozen >= 0) {
      u2h[static_cast<std::size_t>(j)] = static_cast<uint8_t>(frozen);
      dec_u2(j + 1, w);
      return;
    }
    const double p_d = (cls == 0 || cls == 2) ? bf_posterior(b_leaves, u2h, j)
                                              : bf_posterior(prior_leaves, u2h, j);
    const bool side_decision = (cls == 0 || cls == 2);  // acute or F5
    if (side_decision && cfg.mode == DecodeMode::argmax) {
      u2h[static_cast<std::size_t>(j)] = p_d > 0.5 ? 1 : 0;
      dec_u2(j + 1, w);
      u2h[static_cast<std::size_t>(j)] = 0;
      return;
    }
    // Conditional law of the decoder bit given the encoder bit at the same
    // keyed index (independent when the encoder did not draw there).
    const double p_e = enc_p[static_cast<std::size_t>(j)];
    double p1;
    if (p_e < 0.0) {
      p1 = p_d;
    } else if (u2[static_cast<std::size_t>(j)] == 1) {
      p1 = p_e > 0.0 ? std::min(p_e, p_d) / p_e : p_d;
    } else {
      p1 = (1.0 - p_e) > 0.0 ? std::max(0.0, p_d - p_e) / (1.0 - p_e) : p_d;
    }
    if (p1 < 1.0) {
      u2h[static_cast<std::size_t>(j)] = 0;
      dec_u2(j + 1, w * (1.0 - p1));
    }
    if (p1 > 0.0) {
      u2h[static_cast<std::size_t>(j)] = 1;
      dec_u2(j + 1, w * p1);
    }
    u2h[static_cast<std::size_t>(j)] = 0;
  }

  void dec_finish(double w) {
    BitWord u2h_final = u2h;
    if (cfg.paper_step4) {
      for (std::size_t s = 0; s < ctx.acute1.size(); ++s)
        u2h_final[static_cast<std::size_t>(ctx.acute1[s])] = jbits[ctx.pj_split.size() + s];
      for (std::size_t s = 0; s < ctx.acute2.size(); ++s)
        u2h_final[static_cast<std::size_t>(ctx.acute2[s])] = j1bits[ctx.pj1_split.size() + s];
    }
    const BitWord c_hat = polar_transform(u2h_final);
    if (ny < 2) {
      Word y(static_cast<std::size_t>(len), 0);
      accumulate(y, w);
      return;
    }
    for (int i = 0; i < len; ++i)
      y_leaves[static_cast<std::size_t>(i)] = ctx.y_given_bc.at(
          pair_index(b[static_cast<std::size_t>(i)], c_hat[static_cast<std::size_t>(i)], 2));
    synth(0, w);
  }

  void synth(int j, double w) {
    if (w == 0.0) return;
    if (j == len) {
      const BitWord y_bits = polar_transform(t);
      Word y(y_bits.begin(), y_bits.end());
      accumulate(y, w);
      return;
    }
    tick();
    if (ctx.fam->v_y_bc.contains(j)) {
      for (int bit = 0; bit < 2; ++bit) {
        t[static_cast<std::size_t>(j)] = static_cast<uint8_t>(bit);
        synth(j + 1, w * 0.5);
      }
      t[static_cast<std::size_t>(j)] = 0;
      return;
    }
    const double p = bf_posterior(y_leaves, t, j);
    if (p < 1.0) {
      t[static_cast<std::size_t>(j)] = 0;
      synth(j + 1, w * (1.0 - p));
    }
    if (p > 0.0) {
      t[static_cast<std::size_t>(j)] = 1;
      synth(j + 1, w * p);
    }
    t[static_cast<std::size_t>(j)] = 0;
  }

  void accumulate(const Word& y, double w) {
    std::size_t words_y = 1;
    for (int i = 0; i < len; ++i) words_y *= ny;
    result[word_index(x, nx) * words_y + word_index(y, ny)] += w;
  }
};

}  // namespace

JointPmf exhaustive_oracle(const ExperimentConfig& cfg, const BuildArtifacts& art, long budget) {
  if (cfg.k != 1) throw std::invalid_argument("exhaustive_oracle: requires k = 1");
  if (cfg.sidechannel != SideChannelMode::ideal)
    throw std::invalid_argument("exhaustive_oracle: requires the ideal side channel");
  if (cfg.n > 2)
    throw EnumerationBudgetError("exhaustive_oracle: n > 2 exceeds the enumeration budget");
  const CodecContext ctx(cfg.sys, art.family, art.layout);
  OracleWalker walker(cfg, ctx, budget);
  walker.run();
  std::size_t words_x = 1, words_y = 1;
  for (int i = 0; i < ctx.len; ++i) {
    words_x *= cfg.sys.x_size();
    words_y *= cfg.sys.y_size();
  }
  return JointPmf({{"XN", words_x}, {"YN", words_y}}, std::move(walker.result));
}

JointPmf target_word_joint(const CoordinationSystem& sys, int len) {
  const std::size_t nx = sys.x_size(), ny = sys.y_size();
  std::size_t words_x = 1, words_y = 1;
  for (int i = 0; i < len; ++i) {
    words_x *= nx;
    words_y *= ny;
  }
  std::vector<double> table(words_x * words_y, 0.0);
  for (std::size_t xw = 0; xw < words_x; ++xw)
    for (std::size_t yw = 0; yw < words_y; ++yw) {
      double p = 1.0;
      std::size_t xr = xw, yr = yw;
      for (int i = 0; i < len; ++i) {
        const std::size_t xd = xr % nx, yd = yr % ny;
        xr /= nx;
        yr /= ny;
        p *= sys.q_xy().at({xd, yd});
      }
      table[xw * words_y + yw] = p;
    }
  return JointPmf({{"XN", words_x}, {"YN", words_y}}, std::move(table));
}

JointPmf empirical_word_joint(const ExperimentConfig& cfg, const BuildArtifacts& art, int trials) {
  if (cfg.k != 1) throw std::invalid_argument("empirical_word_joint: requires k = 1");
  ExperimentConfig local = cfg;
  local.trials = trials;
  SimReport rep = run_experiment(local, art);
  const std::size_t nx = cfg.sys.x_size(), ny = cfg.sys.y_size();
  const int len = 1 << cfg.n;
  std::size_t words_x = 1, words_y = 1;
  for (int i = 0; i < len; ++i) {
    words_x *= nx;
    words_y *= ny;
  }
  std::vector<double> table(words_x * words_y, 0.0);
  for (const auto& trial : rep.xy_blocks) {
    const auto& [x, y] = trial.front();
    std::size_t xw = 0, yw = 0;
    for (int i = 0; i < len; ++i) {
      xw = xw * nx + x[static_cast<std::size_t>(i)];
      yw = yw * ny + y[static_cast<std::size_t>(i)];
    }
    table[xw * words_y + yw] += 1.0 / static_cast<double>(trials);
  }
  return JointPmf({{"XN", words_x}, {"YN", words_y}}, std::move(table));
}

ProbeReport block_independence_probe(
    const std::vector<std::vector<std::pair<Word, Word>>>& xy_blocks, std::size_t x_size,
    std::size_t y_size) {
  ProbeReport rep;
  if (xy_blocks.empty()) throw std::invalid_argument("block_independence_probe: no trials");
  if (xy_blocks.size() < 1000)
    throw std::invalid_argument("block_independence_probe: insufficient trials (< 1000)");
  const std::size_t k = xy_blocks.front().size();
  if (k < 2) return rep;  // nothing to compare
  const std::size_t cells = x_size * y_size;
  for (std::size_t pair = 1; pair < k; ++pair) {
    std::vector<double> joint(cells * cells, 0.0), prev(cells, 0.0), cur(cells, 0.0);
    double total = 0.0;
    for (const auto& trial : xy_blocks) {
      const auto& [xp, yp] = trial[pair - 1];
      const auto& [xc, yc] = trial[pair];
      for (std::size_t l = 0; l < xp.size(); ++l) {
        const std::size_t sp = xp[l] * y_size + yp[l];
        const std::size_t sc = xc[l] * y_size + yc[l];
        joint[sp * cells + sc] += 1.0;
        prev[sp] += 1.0;
        cur[sc] += 1.0;
        total += 1.0;
      }
    }
    double tv = 0.0;
    for (std::size_t i = 0; i < cells; ++i)
      for (std::size_t j = 0; j < cells; ++j)
        tv += std::abs(joint[i * cells + j] / total - (prev[i] / total) * (cur[j] / total));
    rep.pair_tv.push_back(0.5 * tv);
  }
  rep.max_tv = *std::max_element(rep.pair_tv.begin(), rep.pair_tv.end());
  return rep;
}

}  // namespace coordsim
