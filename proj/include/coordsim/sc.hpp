#pragma once

// Successive-cancellation recursion computing exact per-index posteriors
// P(U^j | U^{1:j-1}, S^N) for a memoryless joint source (V, S) with binary V,
// where U^N = V^N G_n.  Used for randomized-rounding encoders, decoders and
// Monte-Carlo entropy profiling.

#include <array>
#include <cstdint>
#include <vector>

#include "coordsim/pmf.hpp"
#include "coordsim/rng.hpp"
#include "coordsim/transform.hpp"

namespace coordsim {

// Joint pmf over (V, S) for one position; V binary, S over an arbitrary
// finite alphabet (possibly a flattened tuple alphabet).
struct SymbolJoint {
  std::vector<double> table;  // v * s_size + s
  std::size_t s_size = 1;
  bool degenerate_v = false;  // V marginal is a point mass

  SymbolJoint(std::vector<double> t, std::size_t s);

  std::array<double, 2> v_marginal() const;
  Pmf s_marginal() const;
  // P(V=. | S=s); falls back to the V marginal when P(S=s) = 0.
  std::array<double, 2> posterior_given_s(std::size_t s) const;
};

// Exact posterior recursion in the probability domain with per-pair
// renormalization.  Bits are committed in SC order; posterior_one() refers to
// the next uncommitted index.  O(N log N) work per full sweep.
class ScProcess {
 public:
  ScProcess(int n, std::vector<std::array<double, 2>> leaf_pairs);

  int size() const { return size_; }
  int next_index() const { return next_; }
  double posterior_one();
  void commit(int bit);

 private:
  void refresh(int level, int phase);
  void propagate(int level, int phase);

  int stages_;
  int size_;
  int next_ = 0;
  // pairs_[level]: one probability pair per branch; level 0 = leaves.
  std::vector<std::vector<std::array<double, 2>>> pairs_;
  // bits_[level][branch][phase & 1]
  std::vector<std::vector<std::array<uint8_t, 2>>> bits_;
};

enum class ScActionKind { frozen, sample, argmax };

struct ScAction {
  ScActionKind kind = ScActionKind::sample;
  uint8_t frozen_bit = 0;

  static ScAction frozen(int bit) { return {ScActionKind::frozen, static_cast<uint8_t>(bit)}; }
  static ScAction sample() { return {ScActionKind::sample, 0}; }
  static ScAction argmax() { return {ScActionKind::argmax, 0}; }
};

struct PosteriorTrace {
  std::vector<double> posterior_one;  // P(U^j = 1 | past, side)
  BitWord bits;
};

struct ScSweepResult {
  BitWord u;
  PosteriorTrace trace;
};

// One SC sweep over side observations with a per-index policy.  Sampled bits
// draw from keyed uniforms (seed, stream, block_tag, index), so repeated runs
// are bit-identical.  A degenerate SymbolJoint short-circuits to the constant
// word without touching the recursion.
ScSweepResult sc_sweep(const SymbolJoint& sj, const std::vector<std::size_t>& side,
                       const std::vector<ScAction>& policy, uint64_t sample_seed,
                       Stream stream = Stream::generic, uint64_t block_tag = 0);

struct EntropyProfile {
  std::vector<double> mean;
  std::vector<double> std_err;
  int samples = 0;
};

// Teacher-forced Monte-Carlo estimate of H(U^j | U^{1:j-1}, S^N) per index:
// draw (v^N, s^N) i.i.d. from the symbol joint, force u^N = v^N G_n through
// the recursion and average the binary entropy of each recorded posterior.
// The OpenMP version distributes samples across workers with derived seeds
// and is bit-identical to the serial reference.
EntropyProfile entropy_profile(const SymbolJoint& sj, int n, int num_samples, uint64_t seed);
EntropyProfile entropy_profile_serial(const SymbolJoint& sj, int n, int num_samples, uint64_t seed);

}  // namespace coordsim
