#include "coordsim/sc.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace coordsim {

SymbolJoint::SymbolJoint(std::vector<double> t, std::size_t s) : table(std::move(t)), s_size(s) {
  if (s_size == 0 || table.size() != 2 * s_size)
    throw std::invalid_argument("SymbolJoint: table must be 2 x |S|");
  double sum = 0.0;
  for (double p : table) {
    if (!(p >= 0.0)) throw std::invalid_argument("SymbolJoint: negative entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kNormTol)
    throw std::invalid_argument("SymbolJoint: probabilities must sum to one");
  auto vm = v_marginal();
  degenerate_v = (vm[0] == 0.0 || vm[1] == 0.0);
}

std::array<double, 2> SymbolJoint::v_marginal() const {
  std::array<double, 2> m{0.0, 0.0};
  for (std::size_t s = 0; s < s_size; ++s) {
    m[0] += table[s];
    m[1] += table[s_size + s];
  }
  return m;
}

Pmf SymbolJoint::s_marginal() const {
  std::vector<double> m(s_size, 0.0);
  for (std::size_t s = 0; s < s_size; ++s) m[s] = table[s] + table[s_size + s];
  return Pmf(std::move(m));
}

std::array<double, 2> SymbolJoint::posterior_given_s(std::size_t s) const {
  double p0 = table[s];
  double p1 = table[s_size + s];
  double sum = p0 + p1;
  if (sum <= 0.0) {
    auto vm = v_marginal();
    return vm;  // unobservable side value: fall back to the prior
  }
  return {p0 / sum, p1 / sum};
}

ScProcess::ScProcess(int n, std::vector<std::array<double, 2>> leaf_pairs)
    : stages_(n), size_(1 << n) {
  if (n < 0 || n > kMaxStages) throw std::invalid_argument("ScProcess: n out of range");
  if (static_cast<int>(leaf_pairs.size()) != size_)
    throw std::invalid_argument("ScProcess: wrong number of leaves");
  pairs_.resize(static_cast<std::size_t>(stages_) + 1);
  bits_.resize(static_cast<std::size_t>(stages_) + 1);
  for (int level = 0; level <= stages_; ++level) {
    pairs_[level].assign(std::size_t{1} << (stages_ - level), {0.0, 0.0});
    bits_[level].assign(std::size_t{1} << (stages_ - level), {0, 0});
  }
  for (int i = 0; i < size_; ++i) {
    double sum = leaf_pairs[i][0] + leaf_pairs[i][1];
    if (sum <= 0.0)
      pairs_[0][i] = {0.5, 0.5};
    else
      pairs_[0][i] = {leaf_pairs[i][0] / sum, leaf_pairs[i][1] / sum};
  }
}

void ScProcess::refresh(int level, int phase) {
  if (level == 0) return;
  if ((phase & 1) == 0) refresh(level - 1, phase >> 1);
  const std::size_t branches = std::size_t{1} << (stages_ - level);
  for (std::size_t b = 0; b < branches; ++b) {
    const auto& left = pairs_[level - 1][2 * b];
    const auto& right = pairs_[level - 1][2 * b + 1];
    std::array<double, 2> out;
    if ((phase & 1) == 0) {
      out[0] = left[0] * right[0] + left[1] * right[1];
      out[1] = left[1] * right[0] + left[0] * right[1];
    } else {
      const int e = bits_[level][b][0];
      out[0] = left[e] * right[0];
      out[1] = left[e ^ 1] * right[1];
    }
    double sum = out[0] + out[1];
    if (sum <= 0.0)
      pairs_[level][b] = {0.5, 0.5};
    else
      pairs_[level][b] = {out[0] / sum, out[1] / sum};
  }
}

double ScProcess::posterior_one() {
  if (next_ >= size_) throw std::logic_error("ScProcess: sweep exhausted");
  refresh(stages_, next_);
  return pairs_[stages_][0][1];
}

void ScProcess::commit(int bit) {
  if (next_ >= size_) throw std::logic_error("ScProcess: sweep exhausted");
  bits_[stages_][0][next_ & 1] = static_cast<uint8_t>(bit & 1);
  if (next_ & 1) propagate(stages_, next_);
  ++next_;
}

void ScProcess::propagate(int level, int phase) {
  const int child_phase = phase >> 1;
  const std::size_t branches = std::size_t{1} << (stages_ - level);
  for (std::size_t b = 0; b < branches; ++b) {
    const uint8_t even = bits_[level][b][0];
    const uint8_t odd = bits_[level][b][1];
    bits_[level - 1][2 * b][child_phase & 1] = even ^ odd;
    bits_[level - 1][2 * b + 1][child_phase & 1] = odd;
  }
  if ((child_phase & 1) && level > 1) propagate(level - 1, child_phase);
}

ScSweepResult sc_sweep(const SymbolJoint& sj, const std::vector<std::size_t>& side,
                       const std::vector<ScAction>& policy, uint64_t sample_seed, Stream stream,
                       uint64_t block_tag) {
  const std::size_t len = side.size();
  if (!is_power_of_two(len)) throw std::invalid_argument("sc_sweep: side length not a power of two");
  if (policy.size() != len) throw std::invalid_argument("sc_sweep: policy does not cover all indices");

  ScSweepResult res;
  res.u.assign(len, 0);
  res.trace.posterior_one.assign(len, 0.0);
  res.trace.bits.assign(len, 0);

  if (sj.degenerate_v) {
    // V is constant: the transform of the constant word, no randomness used.
    const uint8_t v = sj.v_marginal()[1] > 0.0 ? 1 : 0;
    BitWord leaves(len, v);
    res.u = polar_transform(leaves);
    for (std::size_t j = 0; j < len; ++j) {
      res.trace.posterior_one[j] = res.u[j];
      if (policy[j].kind == ScActionKind::frozen) res.u[j] = policy[j].frozen_bit;
      res.trace.bits[j] = res.u[j];
    }
    return res;
  }

  int n = 0;
  while ((std::size_t{1} << n) < len) ++n;
  std::vector<std::array<double, 2>> leaves(len);
  for (std::size_t i = 0; i < len; ++i) {
    if (side[i] >= sj.s_size) throw std::invalid_argument("sc_sweep: side symbol out of range");
    leaves[i] = sj.posterior_given_s(side[i]);
  }
  ScProcess proc(n, std::move(leaves));
  for (std::size_t j = 0; j < len; ++j) {
    const double p1 = proc.posterior_one();
    res.trace.posterior_one[j] = p1;
    int bit;
    switch (policy[j].kind) {
      case ScActionKind::frozen:
        bit = policy[j].frozen_bit;
        break;
      case ScActionKind::argmax:
        bit = p1 > 0.5 ? 1 : 0;
        break;
      case ScActionKind::sample:
      default:
        if (p1 <= 0.0)
          bit = 0;  // degenerate draws are deterministic and consume nothing
        else if (p1 >= 1.0)
          bit = 1;
        else
          bit = keyed_unit(sample_seed, stream, block_tag, j) < p1 ? 1 : 0;
        break;
    }
    res.u[j] = static_cast<uint8_t>(bit);
    res.trace.bits[j] = res.u[j];
    proc.commit(bit);
  }
  return res;
}

namespace {

// One teacher-forced sample; writes h(posterior_j) into row[0..N).
void profile_sample(const SymbolJoint& sj, int n, uint64_t sample_seed, double* row) {
  const std::size_t len = std::size_t{1} << n;
  Rng rng(sample_seed);
  BitWord v(len);
  std::vector<std::size_t> s(len);
  const std::size_t cells = sj.table.size();
  for (std::size_t i = 0; i < len; ++i) {
    double u = rng.next_unit();
    double acc = 0.0;
    std::size_t pick = cells - 1;
    for (std::size_t c = 0; c < cells; ++c) {
      acc += sj.table[c];
      if (u < acc) { pick = c; break; }
    }
    v[i] = static_cast<uint8_t>(pick / sj.s_size);
    s[i] = pick % sj.s_size;
  }
  const BitWord u_true = polar_transform(v);
  std::vector<ScAction> policy(len);
  for (std::size_t j = 0; j < len; ++j) policy[j] = ScAction::frozen(u_true[j]);
  ScSweepResult sweep = sc_sweep(sj, s, policy, 0);
  for (std::size_t j = 0; j < len; ++j) row[j] = binary_entropy(sweep.trace.posterior_one[j]);
}

EntropyProfile reduce_rows(const std::vector<double>& rows, int num_samples, std::size_t len) {
  EntropyProfile prof;
  prof.samples = num_samples;
  prof.mean.assign(len, 0.0);
  prof.std_err.assign(len, 0.0);
  for (int m = 0; m < num_samples; ++m)
    for (std::size_t j = 0; j < len; ++j) prof.mean[j] += rows[static_cast<std::size_t>(m) * len + j];
  for (std::size_t j = 0; j < len; ++j) prof.mean[j] /= num_samples;
  if (num_samples > 1) {
    for (int m = 0; m < num_samples; ++m)
      for (std::size_t j = 0; j < len; ++j) {
        double d = rows[static_cast<std::size_t>(m) * len + j] - prof.mean[j];
        prof.std_err[j] += d * d;
      }
    for (std::size_t j = 0; j < len; ++j)
      prof.std_err[j] = std::sqrt(prof.std_err[j] / (static_cast<double>(num_samples) *
                                                     (static_cast<double>(num_samples) - 1.0)));
  }
  return prof;
}

}  // namespace

EntropyProfile entropy_profile_serial(const SymbolJoint& sj, int n, int num_samples, uint64_t seed) {
  if (num_samples < 1) throw std::invalid_argument("entropy_profile: need at least one sample");
  const std::size_t len = std::size_t{1} << n;
  std::vector<double> rows(static_cast<std::size_t>(num_samples) * len);
  for (int m = 0; m < num_samples; ++m)
    profile_sample(sj, n, keyed_u64(seed, Stream::profile, static_cast<uint64_t>(m), 0),
                   &rows[static_cast<std::size_t>(m) * len]);
  return reduce_rows(rows, num_samples, len);
}

EntropyProfile entropy_profile(const SymbolJoint& sj, int n, int num_samples, uint64_t seed) {
  if (num_samples < 1) throw std::invalid_argument("entropy_profile: need at least one sample");
  const std::size_t len = std::size_t{1} << n;
  std::vector<double> rows(static_cast<std::size_t>(num_samples) * len);
#pragma omp parallel for schedule(dynamic, 16)
  for (int m = 0; m < num_samples; ++m)
    profile_sample(sj, n, keyed_u64(seed, Stream::profile, static_cast<uint64_t>(m), 0),
                   &rows[static_cast<std::size_t>(m) * len]);
  return reduce_rows(rows, num_samples, len);
}

}  // namespace coordsim
