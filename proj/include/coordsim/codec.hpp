#pragma once

// Chained randomized encoder at node X and reverse-order decoder plus channel
// synthesis at node Y.  Block i's noisy set F3 is embedded, one-time-padded
// with fresh pool bits, into the reliably decodable positions of block i+1;
// the final block's F3 bits travel over a side channel as the block-(k+1)
// payload.

#include <cstdint>
#include <optional>
#include <vector>

#include "coordsim/sc.hpp"
#include "coordsim/sets.hpp"
#include "coordsim/system.hpp"
#include "coordsim/transform.hpp"

namespace coordsim {

using Word = std::vector<uint8_t>;  // one symbol per position

enum class DecodeMode { sample, argmax };

// Pool with read tracking so randomness consumption can be audited exactly.
struct BitPool {
  std::vector<uint8_t> bits;
  mutable std::vector<uint8_t> touched;

  explicit BitPool(std::vector<uint8_t> b = {}) : bits(std::move(b)), touched(bits.size(), 0) {}
  uint8_t read(std::size_t i) const {
    touched.at(i) = 1;
    return bits[i];
  }
  long touched_count() const;
  void reset_touched() const;
};

struct RandomnessPools {
  std::vector<BitPool> j_blocks;   // k fresh vectors of |F4check u F1| bits
  BitPool j1_bar;                  // |F2 u F4hat| bits, reused across blocks
  BitPool j2_bar;                  // |F7| bits, reused
  std::vector<BitPool> m1_blocks;  // k fresh vectors of |F6| bits
  uint64_t m2_seed = 0;            // node-Y local randomness stream
  uint64_t sampling_seed = 0;      // randomized-rounding stream shared by both nodes

  long common_bits_touched() const;  // distinct J, J1bar, J2bar bits read
  long m1_bits_touched() const;
  void reset_touched() const;
};

RandomnessPools make_pools(const ChainLayout& layout, uint64_t seed);

// Draw/consumption counters, one per index visit of each stream.
struct CodecCounters {
  long u2_x_draws = 0;       // encoder roundings of U2 given x  (F3 u F5)
  long u2_prior_draws = 0;   // encoder roundings of U2 without side info
  long u1_cx_draws = 0;      // F8
  long u1_c_draws = 0;       // F9
  long u1_prior_draws = 0;
  long dec_side_draws = 0;   // decoder decisions given b (acute u F5)
  long dec_prior_draws = 0;
  long m2_uniform_draws = 0;  // uniform T positions (V_Y|BC)
  long synth_posterior_draws = 0;
};

struct BlockTrace {
  BitWord u2, c, u1;
  Word a, b;
  BitWord u2_hat, c_hat;
  Word t, y;
};

struct ChainState {
  std::vector<uint8_t> f3_bits;  // this block's F3 values, ascending index order
};

// Precomputed leaf-posterior tables and position maps shared by encoder,
// decoder and the exact oracle.
struct CodecContext {
  CodecContext(const CoordinationSystem& sys, const SetFamily& fam, const ChainLayout& layout);

  const CoordinationSystem* sys;
  const SetFamily* fam;
  const ChainLayout* layout;
  int n = 0;
  int len = 0;

  std::array<double, 2> c_prior{}, a_prior{};
  std::vector<std::array<double, 2>> c_given_x;   // [x]
  std::vector<std::array<double, 2>> c_given_b;   // [b]
  std::vector<std::array<double, 2>> a_given_c;   // [c]
  std::vector<std::array<double, 2>> a_given_cx;  // [c*|X|+x]
  std::vector<std::array<double, 2>> y_given_bc;  // [b*|C|+c]; empty when |Y| = 1

  // Ascending position maps for the pool assignments.
  std::vector<int> pj_full, pj1_full;    // F1 u F4check / F2 u F4hat
  std::vector<int> pj_split, pj1_split;  // minus the acute positions
  std::vector<int> acute1, acute2;
  std::vector<int> f3_positions, f5_positions;
  std::vector<int> f6_positions, f7_positions;

  // Per-index class of the U2 chain: 0 pool, 1 F3, 2 F5, 3 complement.
  std::vector<uint8_t> u2_class;
  // Per-index class of the U1 chain: 0 F6, 1 F7, 2 F8, 3 F9, 4 complement.
  std::vector<uint8_t> u1_class;
};

struct EncodeBlockC {
  BitWord u2, c;
  ChainState chain;  // this block's F3 bits
};

// Algorithm 1 step 2: build U2 for block i (1-based).  Blocks >= 2 require the
// previous block's chain state whenever |F3| > 0.
EncodeBlockC encode_block_c(const CodecContext& ctx, const Word& x, const RandomnessPools& pools,
                            const ChainState* chain, int block_index, CodecCounters& counters);

struct EncodeBlockA {
  BitWord u1;
  Word a;
};

// Algorithm 1 step 4: build U1 for block i given the block's codeword c.
EncodeBlockA encode_block_a(const CodecContext& ctx, const Word& x, const BitWord& c,
                            const RandomnessPools& pools, int block_index,
                            CodecCounters& counters);

struct EncodeRunResult {
  std::vector<Word> a_blocks;
  std::vector<uint8_t> final_f3_payload;  // block k's F3 bits for block k+1
  std::vector<BlockTrace> traces;         // u2, c, u1, a filled
};

EncodeRunResult encode_run(const CodecContext& ctx, const std::vector<Word>& x_blocks,
                           const RandomnessPools& pools, CodecCounters& counters);

struct DecodeBlockC {
  BitWord u2_hat;
};

// Algorithm 2 step 2 for block i; f3_values holds the block's F3 bits
// (payload for i = k, unchained from block i+1 otherwise) so the sweep can
// condition on them.  With paper_step4 set, the decoded acute positions are
// overwritten with the raw pool randomizer bits after the sweep, which is the
// literal (and suspect) reading of the published decoder.
DecodeBlockC decode_block_c(const CodecContext& ctx, const Word& b, const RandomnessPools& pools,
                            int block_index, DecodeMode mode,
                            const std::vector<uint8_t>& f3_values, bool paper_step4,
                            CodecCounters& counters);

// Recover block (next_block_index - 1)'s F3 bits from block next_block_index's
// decoded acute positions and the corresponding pool randomizer bits.
std::vector<uint8_t> unchain_f3_values(const CodecContext& ctx, const BitWord& u2_hat_next,
                                       const RandomnessPools& pools, int next_block_index);

// Algorithm 2 step 6: channel simulation of P_Y|BC from (b, c_hat).
Word synthesize_y(const CodecContext& ctx, const Word& b, const BitWord& c_hat,
                  const RandomnessPools& pools, int block_index, CodecCounters& counters,
                  Word* t_out = nullptr);

struct DecodeRunResult {
  std::vector<Word> y_blocks;
  std::vector<BitWord> u2_hats, c_hats;
  std::vector<Word> t_words;
};

DecodeRunResult decode_run(const CodecContext& ctx, const std::vector<Word>& b_blocks,
                           const std::vector<uint8_t>& final_f3_payload,
                           const RandomnessPools& pools, DecodeMode mode, bool paper_step4,
                           CodecCounters& counters);

}  // namespace coordsim
