#include "coordsim/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace coordsim {

namespace {

void check_distribution(const std::vector<double>& probs, const char* what) {
  if (probs.empty()) throw std::invalid_argument(std::string(what) + ": empty alphabet");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw std::invalid_argument(std::string(what) + ": negative entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kNormTol)
    throw std::invalid_argument(std::string(what) + ": probabilities sum to " + std::to_string(sum));
}

}  // namespace

Pmf::Pmf(std::vector<double> probs) : probs_(std::move(probs)) {
  check_distribution(probs_, "Pmf");
}

Pmf Pmf::uniform(std::size_t size) {
  return Pmf(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

Pmf Pmf::point_mass(std::size_t size, std::size_t at) {
  std::vector<double> v(size, 0.0);
  v.at(at) = 1.0;
  return Pmf(std::move(v));
}

Pmf Pmf::bernoulli(double p_one) { return Pmf({1.0 - p_one, p_one}); }

Channel::Channel(std::vector<Pmf> rows) : rows_(std::move(rows)) {
  if (rows_.empty()) throw std::invalid_argument("Channel: no rows");
  for (const Pmf& r : rows_)
    if (r.size() != rows_.front().size())
      throw std::invalid_argument("Channel: ragged rows");
}

Channel Channel::identity(std::size_t size) {
  std::vector<Pmf> rows;
  rows.reserve(size);
  for (std::size_t i = 0; i < size; ++i) rows.push_back(Pmf::point_mass(size, i));
  return Channel(std::move(rows));
}

Channel Channel::bsc(double p) {
  return Channel({Pmf({1.0 - p, p}), Pmf({p, 1.0 - p})});
}

Channel Channel::bec(double e) {
  return Channel({Pmf({1.0 - e, 0.0, e}), Pmf({0.0, 1.0 - e, e})});
}

JointPmf::JointPmf(std::vector<Axis> axes, std::vector<double> table)
    : axes_(std::move(axes)), table_(std::move(table)) {
  std::size_t cells = 1;
  for (const Axis& a : axes_) {
    if (a.size == 0) throw std::invalid_argument("JointPmf: empty axis " + a.name);
    cells *= a.size;
  }
  if (cells != table_.size()) throw std::invalid_argument("JointPmf: table size mismatch");
  check_distribution(table_, "JointPmf");
  strides_.assign(axes_.size(), 1);
  for (std::size_t i = axes_.size(); i-- > 1;) strides_[i - 1] = strides_[i] * axes_[i].size;
}

std::size_t JointPmf::axis_index(const std::string& name) const {
  for (std::size_t i = 0; i < axes_.size(); ++i)
    if (axes_[i].name == name) return i;
  throw std::invalid_argument("JointPmf: unknown axis " + name);
}

std::size_t JointPmf::axis_size(const std::string& name) const {
  return axes_[axis_index(name)].size;
}

std::size_t JointPmf::flat_index(const std::vector<std::size_t>& coords) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < axes_.size(); ++i) idx += coords[i] * strides_[i];
  return idx;
}

double JointPmf::at(const std::vector<std::size_t>& coords) const {
  return table_[flat_index(coords)];
}

JointPmf JointPmf::marginal(const std::vector<std::string>& names) const {
  std::vector<std::size_t> keep;
  std::vector<Axis> out_axes;
  for (const std::string& n : names) {
    std::size_t ai = axis_index(n);
    for (std::size_t seen : keep)
      if (seen == ai) throw std::invalid_argument("JointPmf: repeated axis " + n);
    keep.push_back(ai);
    out_axes.push_back(axes_[ai]);
  }
  std::vector<std::size_t> out_strides(keep.size(), 1);
  for (std::size_t i = keep.size(); i-- > 1;) out_strides[i - 1] = out_strides[i] * out_axes[i].size;

  std::size_t out_cells = 1;
  for (const Axis& a : out_axes) out_cells *= a.size;
  std::vector<double> out(out_cells, 0.0);

  std::vector<std::size_t> coords(axes_.size(), 0);
  for (std::size_t flat = 0; flat < table_.size(); ++flat) {
    std::size_t oi = 0;
    for (std::size_t i = 0; i < keep.size(); ++i) oi += coords[keep[i]] * out_strides[i];
    out[oi] += table_[flat];
    for (std::size_t i = axes_.size(); i-- > 0;) {
      if (++coords[i] < axes_[i].size) break;
      coords[i] = 0;
    }
  }
  return JointPmf(std::move(out_axes), std::move(out));
}

double binary_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

namespace {
double entropy_table(const std::vector<double>& t) {
  double h = 0.0;
  for (double p : t)
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}
}  // namespace

double entropy(const Pmf& p) { return entropy_table(p.probs()); }
double entropy(const JointPmf& j) { return entropy_table(j.table()); }

double entropy_of(const JointPmf& j, const std::vector<std::string>& axes) {
  return entropy(j.marginal(axes));
}

double conditional_entropy(const JointPmf& j, const std::vector<std::string>& target,
                           const std::vector<std::string>& given) {
  std::vector<std::string> both = given;
  for (const std::string& t : target) {
    for (const std::string& g : given)
      if (g == t) throw std::invalid_argument("conditional_entropy: axis in both groups: " + t);
    both.push_back(t);
  }
  if (given.empty()) return entropy_of(j, target);
  return entropy_of(j, both) - entropy_of(j, given);
}

double mutual_information(const JointPmf& j, const std::vector<std::string>& a,
                          const std::vector<std::string>& b) {
  std::vector<std::string> both = a;
  for (const std::string& bn : b) {
    for (const std::string& an : a)
      if (an == bn) throw std::invalid_argument("mutual_information: axis in both groups: " + bn);
    both.push_back(bn);
  }
  double mi = entropy_of(j, a) + entropy_of(j, b) - entropy_of(j, both);
  if (mi < -kNormTol) throw std::logic_error("mutual_information: negative beyond tolerance");
  return std::max(mi, 0.0);
}

double min_star(const Pmf& p) {
  double m = std::numeric_limits<double>::infinity();
  for (double v : p.probs())
    if (v > 0.0) m = std::min(m, v);
  return m;
}

namespace {
double tv_tables(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("total_variation: alphabet mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}
}  // namespace

double total_variation(const Pmf& p, const Pmf& q) { return tv_tables(p.probs(), q.probs()); }

double total_variation(const JointPmf& p, const JointPmf& q) {
  return tv_tables(p.table(), q.table());
}

double kl_divergence(const Pmf& p, const Pmf& q) {
  if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: alphabet mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
    d += p[i] * std::log2(p[i] / q[i]);
  }
  // Pinsker sanity: TV <= sqrt(D * ln2 / 2) must hold on every evaluated pair.
  double tv = total_variation(p, q);
  if (std::isfinite(d) && tv > std::sqrt(std::max(d, 0.0) * std::log(2.0) / 2.0) + 1e-9)
    throw std::logic_error("kl_divergence: Pinsker inequality violated");
  return d;
}

}  // namespace coordsim
