#include "coordsim/codec.hpp"

#include <cmath>
#include <stdexcept>

namespace coordsim {

long BitPool::touched_count() const {
  long c = 0;
  for (uint8_t t : touched) c += t;
  return c;
}

void BitPool::reset_touched() const {
  for (std::size_t i = 0; i < touched.size(); ++i) touched[i] = 0;
}

long RandomnessPools::common_bits_touched() const {
  long c = j1_bar.touched_count() + j2_bar.touched_count();
  for (const BitPool& p : j_blocks) c += p.touched_count();
  return c;
}

long RandomnessPools::m1_bits_touched() const {
  long c = 0;
  for (const BitPool& p : m1_blocks) c += p.touched_count();
  return c;
}

void RandomnessPools::reset_touched() const {
  j1_bar.reset_touched();
  j2_bar.reset_touched();
  for (const BitPool& p : j_blocks) p.reset_touched();
  for (const BitPool& p : m1_blocks) p.reset_touched();
}

RandomnessPools make_pools(const ChainLayout& layout, uint64_t seed) {
  RandomnessPools pools;
  auto fill = [&](Stream tag, uint64_t hi, int bits) {
    std::vector<uint8_t> v(static_cast<std::size_t>(bits));
    for (int t = 0; t < bits; ++t)
      v[static_cast<std::size_t>(t)] =
          static_cast<uint8_t>(keyed_bit(seed, tag, hi, static_cast<uint64_t>(t)));
    return BitPool(std::move(v));
  };
  for (int i = 1; i <= layout.k; ++i)
    pools.j_blocks.push_back(fill(Stream::pool_j, static_cast<uint64_t>(i), layout.j_block_bits));
  pools.j1_bar = fill(Stream::pool_j1bar, 0, layout.j1_bar_bits);
  pools.j2_bar = fill(Stream::pool_j2bar, 0, layout.j2_bar_bits);
  for (int i = 1; i <= layout.k; ++i)
    pools.m1_blocks.push_back(fill(Stream::pool_m1, static_cast<uint64_t>(i), layout.m1_block_bits));
  pools.m2_seed = mix_seed(seed, 0x6d32);
  pools.sampling_seed = mix_seed(seed, 0x7253);
  return pools;
}

namespace {

// Leaf posterior P(V = . | W = w) from a two-variable marginal, falling back
// to the V marginal when the conditioning value has zero mass.
std::vector<std::array<double, 2>> posterior_table(const JointPmf& joint_vw) {
  const std::size_t nw = joint_vw.axes()[1].size;
  std::vector<std::array<double, 2>> out(nw);
  std::array<double, 2> prior{0.0, 0.0};
  for (std::size_t w = 0; w < nw; ++w) {
    prior[0] += joint_vw.at({0, w});
    prior[1] += joint_vw.at({1, w});
  }
  for (std::size_t w = 0; w < nw; ++w) {
    double p0 = joint_vw.at({0, w});
    double p1 = joint_vw.at({1, w});
    double sum = p0 + p1;
    out[w] = sum > 0.0 ? std::array<double, 2>{p0 / sum, p1 / sum} : prior;
  }
  return out;
}

int draw_bit(double p_one, uint64_t seed, Stream tag, uint64_t block, uint64_t index) {
  if (p_one <= 0.0) return 0;
  if (p_one >= 1.0) return 1;
  return keyed_unit(seed, tag, block, index) < p_one ? 1 : 0;
}

}  // namespace

CodecContext::CodecContext(const CoordinationSystem& system, const SetFamily& family,
                           const ChainLayout& chain)
    : sys(&system), fam(&family), layout(&chain), n(family.n) {
  len = 1 << n;
  if (!family.partition_filled)
    throw std::invalid_argument("CodecContext: partition not derived");
  if (system.c_size() != 2 || system.a_size() != 2)
    throw std::invalid_argument("CodecContext: C and A must be binary");
  if (system.y_size() > 2)
    throw std::invalid_argument("CodecContext: Y must be binary or degenerate");

  const JointPmf full = compose_joint(system);
  const JointPmf cx = full.marginal({"C", "X"});
  const JointPmf cb = full.marginal({"C", "B"});
  const JointPmf ac = full.marginal({"A", "C"});

  c_given_x = posterior_table(cx);
  c_given_b = posterior_table(cb);
  a_given_c = posterior_table(ac);
  {
    std::array<double, 2> p{0.0, 0.0};
    for (std::size_t x = 0; x < system.x_size(); ++x) {
      p[0] += cx.at({0, x});
      p[1] += cx.at({1, x});
    }
    c_prior = p;
  }
  {
    std::array<double, 2> p{0.0, 0.0};
    for (std::size_t c = 0; c < 2; ++c) {
      p[0] += ac.at({0, c});
      p[1] += ac.at({1, c});
    }
    a_prior = p;
  }
  {
    // P(A | C, X) indexed by c*|X|+x.
    const JointPmf acx = full.marginal({"A", "C", "X"});
    const std::size_t nx = system.x_size();
    a_given_cx.assign(2 * nx, {0.0, 0.0});
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t x = 0; x < nx; ++x) {
        double p0 = acx.at({0, c, x});
        double p1 = acx.at({1, c, x});
        double sum = p0 + p1;
        a_given_cx[c * nx + x] = sum > 0.0 ? std::array<double, 2>{p0 / sum, p1 / sum}
                                           : a_given_c[c];
      }
  }
  if (system.y_size() == 2) {
    // P(Y | B, C) straight from the synthesis kernel.
    const std::size_t nb = system.b_size();
    y_given_bc.assign(nb * 2, {0.0, 0.0});
    for (std::size_t b = 0; b < nb; ++b)
      for (std::size_t c = 0; c < 2; ++c) {
        std::size_t in = pair_index(b, c, 2);
        y_given_bc[in] = {system.p_y_given_bc().prob(0, in), system.p_y_given_bc().prob(1, in)};
      }
  }

  const SetFamily& f = family;
  pj_full = f.f1.unite(f.f4check).to_vector();
  pj1_full = f.f2.unite(f.f4hat).to_vector();
  pj_split = f.f1.minus(chain.f31_acute).unite(f.f4check).to_vector();
  pj1_split = f.f2.minus(chain.f32_acute).unite(f.f4hat).to_vector();
  acute1 = chain.f31_acute.to_vector();
  acute2 = chain.f32_acute.to_vector();
  f3_positions = f.f3.to_vector();
  f5_positions = f.f5.to_vector();
  f6_positions = f.f6.to_vector();
  f7_positions = f.f7.to_vector();

  u2_class.assign(static_cast<std::size_t>(len), 3);
  const IndexSet pool_set = f.f1.unite(f.f2).unite(f.f4);
  for (int i = 0; i < len; ++i) {
    if (pool_set.contains(i)) u2_class[static_cast<std::size_t>(i)] = 0;
    else if (f.f3.contains(i)) u2_class[static_cast<std::size_t>(i)] = 1;
    else if (f.f5.contains(i)) u2_class[static_cast<std::size_t>(i)] = 2;
  }
  u1_class.assign(static_cast<std::size_t>(len), 4);
  for (int i = 0; i < len; ++i) {
    if (f.f6.contains(i)) u1_class[static_cast<std::size_t>(i)] = 0;
    else if (f.f7.contains(i)) u1_class[static_cast<std::size_t>(i)] = 1;
    else if (f.f8.contains(i)) u1_class[static_cast<std::size_t>(i)] = 2;
    else if (f.f9.contains(i)) u1_class[static_cast<std::size_t>(i)] = 3;
  }
}

namespace {

// Frozen pool assignments for the U2 chain of one block, -1 where not frozen.
// Encoder blocks >= 2 embed the previous F3 bits XOR the trailing pool bits
// (Crypto Lemma) into the acute positions; the decoder leaves those positions
// to the SC decision rule.
std::vector<int> u2_frozen_map(const CodecContext& ctx, const RandomnessPools& pools,
                               int block_index, bool split_layout, const ChainState* chain,
                               bool embed_acute) {
  std::vector<int> frozen(static_cast<std::size_t>(ctx.len), -1);
  const BitPool& j = pools.j_blocks.at(static_cast<std::size_t>(block_index - 1));
  if (!split_layout) {
    for (std::size_t t = 0; t < ctx.pj_full.size(); ++t)
      frozen[static_cast<std::size_t>(ctx.pj_full[t])] = j.read(t);
    for (std::size_t t = 0; t < ctx.pj1_full.size(); ++t)
      frozen[static_cast<std::size_t>(ctx.pj1_full[t])] = pools.j1_bar.read(t);
    return frozen;
  }
  for (std::size_t t = 0; t < ctx.pj_split.size(); ++t)
    frozen[static_cast<std::size_t>(ctx.pj_split[t])] = j.read(t);
  for (std::size_t t = 0; t < ctx.pj1_split.size(); ++t)
    frozen[static_cast<std::size_t>(ctx.pj1_split[t])] = pools.j1_bar.read(t);
  if (embed_acute) {
    const int f31 = ctx.layout->f31_size;
    for (std::size_t s = 0; s < ctx.acute1.size(); ++s)
      frozen[static_cast<std::size_t>(ctx.acute1[s])] =
          chain->f3_bits.at(s) ^ j.read(ctx.pj_split.size() + s);
    for (std::size_t s = 0; s < ctx.acute2.size(); ++s)
      frozen[static_cast<std::size_t>(ctx.acute2[s])] =
          chain->f3_bits.at(static_cast<std::size_t>(f31) + s) ^
          pools.j1_bar.read(ctx.pj1_split.size() + s);
  }
  return frozen;
}

}  // namespace

EncodeBlockC encode_block_c(const CodecContext& ctx, const Word& x, const RandomnessPools& pools,
                            const ChainState* chain, int block_index, CodecCounters& counters) {
  if (static_cast<int>(x.size()) != ctx.len)
    throw std::invalid_argument("encode_block_c: wrong source length");
  const bool chained = block_index >= 2 && !ctx.f3_positions.empty();
  if (chained && (chain == nullptr || chain->f3_bits.size() != ctx.f3_positions.size()))
    throw std::invalid_argument("encode_block_c: chain state missing for block >= 2");

  const std::vector<int> frozen =
      u2_frozen_map(ctx, pools, block_index, /*split_layout=*/block_index >= 2, chain,
                    /*embed_acute=*/block_index >= 2);

  std::vector<std::array<double, 2>> prior_leaves(static_cast<std::size_t>(ctx.len), ctx.c_prior);
  std::vector<std::array<double, 2>> x_leaves(static_cast<std::size_t>(ctx.len));
  for (int i = 0; i < ctx.len; ++i)
    x_leaves[static_cast<std::size_t>(i)] = ctx.c_given_x.at(x[static_cast<std::size_t>(i)]);
  ScProcess prior(ctx.n, std::move(prior_leaves));
  ScProcess xcond(ctx.n, std::move(x_leaves));

  EncodeBlockC out;
  out.u2.assign(static_cast<std::size_t>(ctx.len), 0);
  for (int j = 0; j < ctx.len; ++j) {
    const double p_prior = prior.posterior_one();
    const double p_x = xcond.posterior_one();
    int bit;
    if (frozen[static_cast<std::size_t>(j)] >= 0) {
      bit = frozen[static_cast<std::size_t>(j)];
    } else if (ctx.u2_class[static_cast<std::size_t>(j)] == 1 ||
               ctx.u2_class[static_cast<std::size_t>(j)] == 2) {
      bit = draw_bit(p_x, pools.sampling_seed, Stream::rounding_u2,
                     static_cast<uint64_t>(block_index), static_cast<uint64_t>(j));
      ++counters.u2_x_draws;
    } else {
      bit = draw_bit(p_prior, pools.sampling_seed, Stream::rounding_u2,
                     static_cast<uint64_t>(block_index), static_cast<uint64_t>(j));
      ++counters.u2_prior_draws;
    }
    out.u2[static_cast<std::size_t>(j)] = static_cast<uint8_t>(bit);
    prior.commit(bit);
    xcond.commit(bit);
  }
  out.c = polar_transform(out.u2);
  out.chain.f3_bits.reserve(ctx.f3_positions.size());
  for (int p : ctx.f3_positions) out.chain.f3_bits.push_back(out.u2[static_cast<std::size_t>(p)]);
  return out;
}

EncodeBlockA encode_block_a(const CodecContext& ctx, const Word& x, const BitWord& c,
                            const RandomnessPools& pools, int block_index,
                            CodecCounters& counters) {
  const std::size_t nx = ctx.sys->x_size();
  std::vector<std::array<double, 2>> prior_leaves(static_cast<std::size_t>(ctx.len), ctx.a_prior);
  std::vector<std::array<double, 2>> c_leaves(static_cast<std::size_t>(ctx.len));
  std::vector<std::array<double, 2>> cx_leaves(static_cast<std::size_t>(ctx.len));
  for (int i = 0; i < ctx.len; ++i) {
    const std::size_t ci = c[static_cast<std::size_t>(i)];
    const std::size_t xi = x[static_cast<std::size_t>(i)];
    c_leaves[static_cast<std::size_t>(i)] = ctx.a_given_c.at(ci);
    cx_leaves[static_cast<std::size_t>(i)] = ctx.a_given_cx.at(ci * nx + xi);
  }
  ScProcess prior(ctx.n, std::move(prior_leaves));
  ScProcess ccond(ctx.n, std::move(c_leaves));
  ScProcess cxcond(ctx.n, std::move(cx_leaves));

  const BitPool& m1 = pools.m1_blocks.at(static_cast<std::size_t>(block_index - 1));
  std::vector<int> frozen(static_cast<std::size_t>(ctx.len), -1);
  for (std::size_t t = 0; t < ctx.f6_positions.size(); ++t)
    frozen[static_cast<std::size_t>(ctx.f6_positions[t])] = m1.read(t);
  for (std::size_t t = 0; t < ctx.f7_positions.size(); ++t)
    frozen[static_cast<std::size_t>(ctx.f7_positions[t])] = pools.j2_bar.read(t);

  EncodeBlockA out;
  out.u1.assign(static_cast<std::size_t>(ctx.len), 0);
  for (int j = 0; j < ctx.len; ++j) {
    const double p_prior = prior.posterior_one();
    const double p_c = ccond.posterior_one();
    const double p_cx = cxcond.posterior_one();
    int bit;
    const uint8_t cls = ctx.u1_class[static_cast<std::size_t>(j)];
    if (frozen[static_cast<std::size_t>(j)] >= 0) {
      bit = frozen[static_cast<std::size_t>(j)];
    } else if (cls == 2) {  // F8: conditioned on (c, x)
      bit = draw_bit(p_cx, pools.sampling_seed, Stream::rounding_u1,
                     static_cast<uint64_t>(block_index), static_cast<uint64_t>(j));
      ++counters.u1_cx_draws;
    } else if (cls == 3) {  // F9: conditioned on c
      bit = draw_bit(p_c, pools.sampling_seed, Stream::rounding_u1,
                     static_cast<uint64_t>(block_index), static_cast<uint64_t>(j));
      ++counters.u1_c_draws;
    } else {
      bit = draw_bit(p_prior, pools.sampling_seed, Stream::rounding_u1,
                     static_cast<uint64_t>(block_index), static_cast<uint64_t>(j));
      ++counters.u1_prior_draws;
    }
    out.u1[static_cast<std::size_t>(j)] = static_cast<uint8_t>(bit);
    prior.commit(bit);
    ccond.commit(bit);
    cxcond.commit(bit);
  }
  const BitWord a_bits = polar_transform(out.u1);
  out.a.assign(a_bits.begin(), a_bits.end());
  return out;
}

EncodeRunResult encode_run(const CodecContext& ctx, const std::vector<Word>& x_blocks,
                           const RandomnessPools& pools, CodecCounters& counters) {
  if (x_blocks.empty()) throw std::invalid_argument("encode_run: need at least one block");
  EncodeRunResult out;
  ChainState chain;
  for (std::size_t i = 0; i < x_blocks.size(); ++i) {
    const int block = static_cast<int>(i) + 1;
    EncodeBlockC ec = encode_block_c(ctx, x_blocks[i], pools, block >= 2 ? &chain : nullptr,
                                     block, counters);
    EncodeBlockA ea = encode_block_a(ctx, x_blocks[i], ec.c, pools, block, counters);
    BlockTrace trace;
    trace.u2 = ec.u2;
    trace.c = ec.c;
    trace.u1 = ea.u1;
    trace.a = ea.a;
    out.traces.push_back(std::move(trace));
    out.a_blocks.push_back(std::move(ea.a));
    chain = std::move(ec.chain);
  }
  out.final_f3_payload = chain.f3_bits;
  return out;
}

DecodeBlockC decode_block_c(const CodecContext& ctx, const Word& b, const RandomnessPools& pools,
                            int block_index, DecodeMode mode,
                            const std::vector<uint8_t>& f3_values, bool paper_step4,
                            CodecCounters& counters) {
  if (static_cast<int>(b.size()) != ctx.len)
    throw std::invalid_argument("decode_block_c: wrong received length");
  if (f3_values.size() != ctx.f3_positions.size())
    throw std::invalid_argument("decode_block_c: F3 values missing");

  // Default: block 1 replays the encoder's full pool map (nothing was
  // embedded there).  The literal algorithm uses the split map everywhere and
  // afterwards overwrites the acute positions with the raw randomizer bits.
  const bool split_layout = paper_step4 || block_index >= 2;
  std::vector<int> frozen = u2_frozen_map(ctx, pools, block_index, split_layout, nullptr,
                                          /*embed_acute=*/false);
  for (std::size_t t = 0; t < f3_values.size(); ++t)
    frozen[static_cast<std::size_t>(ctx.f3_positions[t])] = f3_values[t];

  std::vector<std::array<double, 2>> prior_leaves(static_cast<std::size_t>(ctx.len), ctx.c_prior);
  std::vector<std::array<double, 2>> b_leaves(static_cast<std::size_t>(ctx.len));
  for (int i = 0; i < ctx.len; ++i)
    b_leaves[static_cast<std::size_t>(i)] = ctx.c_given_b.at(b[static_cast<std::size_t>(i)]);
  ScProcess prior(ctx.n, std::move(prior_leaves));
  ScProcess bcond(ctx.n, std::move(b_leaves));

  DecodeBlockC out;
  out.u2_hat.assign(static_cast<std::size_t>(ctx.len), 0);
  for (int j = 0; j < ctx.len; ++j) {
    const double p_prior = prior.posterior_one();
    const double p_b = bcond.posterior_one();
    int bit;
    if (frozen[static_cast<std::size_t>(j)] >= 0) {
      bit = frozen[static_cast<std::size_t>(j)];
    } else if (ctx.u2_class[static_cast<std::size_t>(j)] == 3) {
      // Complement positions re-draw the encoder's keyed rounding; identical
      // prefixes reproduce identical bits.
      bit = draw_bit(p_prior, pools.sampling_seed, Stream::rounding_u2,
                     static_cast<uint64_t>(block_index), static_cast<uint64_t>(j));
      ++counters.dec_prior_draws;
    } else {
      // Acute or F5 positions: decide from the posterior given b.
      if (mode == DecodeMode::argmax)
        bit = p_b > 0.5 ? 1 : 0;
      else
        bit = draw_bit(p_b, pools.sampling_seed, Stream::rounding_u2,
                       static_cast<uint64_t>(block_index), static_cast<uint64_t>(j));
      ++counters.dec_side_draws;
    }
    out.u2_hat[static_cast<std::size_t>(j)] = static_cast<uint8_t>(bit);
    prior.commit(bit);
    bcond.commit(bit);
  }

  if (paper_step4) {
    const BitPool& j_pool = pools.j_blocks.at(static_cast<std::size_t>(block_index - 1));
    for (std::size_t s = 0; s < ctx.acute1.size(); ++s)
      out.u2_hat[static_cast<std::size_t>(ctx.acute1[s])] =
          j_pool.read(ctx.pj_split.size() + s);
    for (std::size_t s = 0; s < ctx.acute2.size(); ++s)
      out.u2_hat[static_cast<std::size_t>(ctx.acute2[s])] =
          pools.j1_bar.read(ctx.pj1_split.size() + s);
  }
  return out;
}

std::vector<uint8_t> unchain_f3_values(const CodecContext& ctx, const BitWord& u2_hat_next,
                                       const RandomnessPools& pools, int next_block_index) {
  const BitPool& j_pool = pools.j_blocks.at(static_cast<std::size_t>(next_block_index - 1));
  std::vector<uint8_t> f3(ctx.f3_positions.size(), 0);
  for (std::size_t s = 0; s < ctx.acute1.size(); ++s)
    f3[s] = u2_hat_next[static_cast<std::size_t>(ctx.acute1[s])] ^
            j_pool.read(ctx.pj_split.size() + s);
  for (std::size_t s = 0; s < ctx.acute2.size(); ++s)
    f3[static_cast<std::size_t>(ctx.layout->f31_size) + s] =
        u2_hat_next[static_cast<std::size_t>(ctx.acute2[s])] ^
        pools.j1_bar.read(ctx.pj1_split.size() + s);
  return f3;
}

Word synthesize_y(const CodecContext& ctx, const Word& b, const BitWord& c_hat,
                  const RandomnessPools& pools, int block_index, CodecCounters& counters,
                  Word* t_out) {
  if (ctx.sys->y_size() < 2) {
    if (t_out) t_out->assign(static_cast<std::size_t>(ctx.len), 0);
    return Word(static_cast<std::size_t>(ctx.len), 0);
  }
  std::vector<std::array<double, 2>> leaves(static_cast<std::size_t>(ctx.len));
  for (int i = 0; i < ctx.len; ++i)
    leaves[static_cast<std::size_t>(i)] =
        ctx.y_given_bc.at(pair_index(b[static_cast<std::size_t>(i)],
                                     c_hat[static_cast<std::size_t>(i)], 2));
  ScProcess proc(ctx.n, std::move(leaves));
  BitWord t(static_cast<std::size_t>(ctx.len), 0);
  for (int j = 0; j < ctx.len; ++j) {
    const double p1 = proc.posterior_one();
    int bit;
    if (ctx.fam->v_y_bc.contains(j)) {
      bit = keyed_bit(pools.m2_seed, Stream::synth_uniform, static_cast<uint64_t>(block_index),
                      static_cast<uint64_t>(j));
      ++counters.m2_uniform_draws;
    } else {
      bit = draw_bit(p1, pools.m2_seed, Stream::synth_rounding, static_cast<uint64_t>(block_index),
                     static_cast<uint64_t>(j));
      ++counters.synth_posterior_draws;
    }
    t[static_cast<std::size_t>(j)] = static_cast<uint8_t>(bit);
    proc.commit(bit);
  }
  const BitWord y_bits = polar_transform(t);
  if (t_out) t_out->assign(t.begin(), t.end());
  return Word(y_bits.begin(), y_bits.end());
}

DecodeRunResult decode_run(const CodecContext& ctx, const std::vector<Word>& b_blocks,
                           const std::vector<uint8_t>& final_f3_payload,
                           const RandomnessPools& pools, DecodeMode mode, bool paper_step4,
                           CodecCounters& counters) {
  const int k = static_cast<int>(b_blocks.size());
  if (k < 1) throw std::invalid_argument("decode_run: need at least one block");
  if (!ctx.f3_positions.empty() && final_f3_payload.size() != ctx.f3_positions.size())
    throw std::invalid_argument("decode_run: final F3 payload missing");

  DecodeRunResult out;
  out.y_blocks.resize(static_cast<std::size_t>(k));
  out.u2_hats.resize(static_cast<std::size_t>(k));
  out.c_hats.resize(static_cast<std::size_t>(k));
  out.t_words.resize(static_cast<std::size_t>(k));
  for (int i = k; i >= 1; --i) {
    const std::vector<uint8_t> f3 =
        (i == k) ? final_f3_payload
                 : unchain_f3_values(ctx, out.u2_hats[static_cast<std::size_t>(i)], pools, i + 1);
    DecodeBlockC dec = decode_block_c(ctx, b_blocks[static_cast<std::size_t>(i - 1)], pools, i,
                                      mode, f3, paper_step4, counters);
    out.u2_hats[static_cast<std::size_t>(i - 1)] = dec.u2_hat;
    out.c_hats[static_cast<std::size_t>(i - 1)] = polar_transform(dec.u2_hat);
    out.y_blocks[static_cast<std::size_t>(i - 1)] =
        synthesize_y(ctx, b_blocks[static_cast<std::size_t>(i - 1)],
                     out.c_hats[static_cast<std::size_t>(i - 1)], pools, i, counters,
                     &out.t_words[static_cast<std::size_t>(i - 1)]);
  }
  return out;
}

}  // namespace coordsim
