#pragma once

// DMC simulation, end-to-end experiment orchestration, the exact tiny-N
// oracle, rate accounting and the achievability-region checker.

#include <array>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "coordsim/codec.hpp"
#include "coordsim/sets.hpp"
#include "coordsim/system.hpp"

namespace coordsim {

enum class SideChannelMode { ideal, repetition };

class BudgetExceededError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EnumerationBudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  explicit ExperimentConfig(CoordinationSystem system) : sys(std::move(system)) {}

  CoordinationSystem sys;
  int n = 3;
  int k = 1;
  double eps_vh = 0.1;
  double eps_h = 0.1;
  int spectrum_samples = 2000;
  uint64_t construction_seed = 1;
  int trials = 100;
  uint64_t seed = 1;
  DecodeMode mode = DecodeMode::sample;
  SideChannelMode sidechannel = SideChannelMode::ideal;
  int side_repeats = 9;
  bool paper_step4 = false;
  int workers = 0;             // 0 = library default
  double budget_seconds = 0.0; // 0 = unlimited
  bool keep_block_traces = false;  // retain full per-block words in the report
};

struct BuildArtifacts {
  PolarSpectrum spectrum;
  SetFamily family;
  ChainLayout layout;
};

BuildArtifacts build_artifacts(const ExperimentConfig& cfg);

// Per-symbol i.i.d. transmission through the DMC.
Word dmc_transmit(const Word& a, const Channel& ch, uint64_t seed, uint64_t block_tag = 0);

// Block-(k+1) transport of the F3 payload.  `ideal` returns the payload
// unchanged; `repetition` sends each bit `repeats` times through the channel
// and decodes per bit by maximum likelihood.
std::vector<uint8_t> side_channel_roundtrip(const std::vector<uint8_t>& payload, const Channel& ch,
                                            SideChannelMode mode, int repeats, uint64_t seed);

struct CodeRates {
  double r_o = 0, r_c = 0, r_a = 0, rho1 = 0, rho2 = 0;
};

CodeRates code_rates(const SetFamily& fam, const ChainLayout& layout, int k, int N);

struct RegionReport {
  double i_xy_ac = 0, i_xy_c = 0, i_x_ac = 0, i_x_c = 0, i_b_c = 0, h_y_bc = 0;
  // Signed margins, positive = satisfied, in the inequality order
  // (a) R_a+R_o+R_c > I(XY;AC) ... (g) rho2 > H(Y|BC).
  std::array<double, 7> margins{};
  bool feasible = false;
  bool rc_conflict = false;  // I(X;C) >= I(B;C): no R_c satisfies both (d) and (e)
};

RegionReport region_check(const CoordinationSystem& sys, const CodeRates& rates);

struct SimReport {
  CodeRates rates;
  RegionReport region;
  std::vector<double> empirical_xy;  // row-major (x, y), pooled over positions/blocks/trials
  double tv = 0.0;                   // unsmoothed, to the target q_xy
  double kl = 0.0;                   // add-1/2 smoothed empirical vs target
  std::vector<double> per_block_tv;
  long pooled_pairs = 0;

  // Randomness accounting, totals over all trials.
  long common_bits = 0;
  long m1_bits = 0;
  long m2_draws = 0;
  long u2_x_draws = 0;
  long u1_cx_draws = 0;
  long side_payload_bits = 0;  // |F3| per trial, summed
  double side_overhead_per_action = 0.0;

  int trials = 0;
  uint64_t seed = 0;
  double runtime_seconds = 0.0;  // informational only; kept out of primary outputs

  // (x, y) words per trial and block, for the independence probe and traces.
  std::vector<std::vector<std::pair<Word, Word>>> xy_blocks;
  // Full per-block words, only when keep_block_traces is set.
  std::vector<std::vector<BlockTrace>> block_traces;
};

SimReport run_experiment(const ExperimentConfig& cfg, const BuildArtifacts& art);
SimReport run_experiment(const ExperimentConfig& cfg);
// Serial reference implementation; bit-identical to run_experiment.
SimReport run_experiment_serial(const ExperimentConfig& cfg, const BuildArtifacts& art);

// Exact induced joint over (X^N, Y^N) for n <= 2, k = 1, ideal side channel:
// sums every pool realization, rounding draw (by exact posterior weight,
// including the coupling induced by the shared rounding stream), channel
// transition and synthesis draw.  Word index encoding: symbol at position 0
// is the most significant digit.
JointPmf exhaustive_oracle(const ExperimentConfig& cfg, const BuildArtifacts& art,
                           long budget = 1L << 26);

// Exact i.i.d. target over words, same encoding as the oracle output.
JointPmf target_word_joint(const CoordinationSystem& sys, int len);

// Monte-Carlo word-level empirical joint from the real pipeline (k = 1).
JointPmf empirical_word_joint(const ExperimentConfig& cfg, const BuildArtifacts& art, int trials);

struct ProbeReport {
  std::vector<double> pair_tv;  // adjacent block pairs (i-1, i)
  double max_tv = 0.0;
};

// Empirical counterpart of inter-block independence: TV between the pooled
// joint of adjacent blocks' (X, Y) symbols and the product of the per-block
// pooled joints.  Requires at least 1000 trials.
ProbeReport block_independence_probe(
    const std::vector<std::vector<std::pair<Word, Word>>>& xy_blocks, std::size_t x_size,
    std::size_t y_size);

}  // namespace coordsim
