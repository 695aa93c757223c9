#pragma once

// Exact finite-alphabet probability objects and the information measures
// built on them.  All types are immutable after construction and all
// operations are pure, so they can be shared freely across workers.

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace coordsim {

inline constexpr double kNormTol = 1e-9;      // construction normalization
inline constexpr double kComposeTol = 1e-6;   // accumulated-product checks

// Probability vector over a finite alphabet.
class Pmf {
 public:
  explicit Pmf(std::vector<double> probs);

  static Pmf uniform(std::size_t size);
  static Pmf point_mass(std::size_t size, std::size_t at);
  static Pmf bernoulli(double p_one);  // {1-p, p}

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  const std::vector<double>& probs() const { return probs_; }

 private:
  std::vector<double> probs_;
};

// Row-stochastic conditional kernel P(out | in); one Pmf per input symbol.
class Channel {
 public:
  explicit Channel(std::vector<Pmf> rows);

  static Channel identity(std::size_t size);
  static Channel bsc(double p);  // binary symmetric, crossover p
  static Channel bec(double e);  // binary erasure; outputs {0, 1, erasure=2}

  std::size_t input_size() const { return rows_.size(); }
  std::size_t output_size() const { return rows_.front().size(); }
  const Pmf& row(std::size_t in) const { return rows_[in]; }
  double prob(std::size_t out, std::size_t in) const { return rows_[in][out]; }

 private:
  std::vector<Pmf> rows_;
};

struct Axis {
  std::string name;
  std::size_t size;
};

// Dense joint pmf over a product alphabet, row-major in axis order.
class JointPmf {
 public:
  JointPmf(std::vector<Axis> axes, std::vector<double> table);

  const std::vector<Axis>& axes() const { return axes_; }
  const std::vector<double>& table() const { return table_; }
  std::size_t cells() const { return table_.size(); }

  std::size_t axis_index(const std::string& name) const;  // throws on unknown axis
  std::size_t axis_size(const std::string& name) const;

  double at(const std::vector<std::size_t>& coords) const;
  std::size_t flat_index(const std::vector<std::size_t>& coords) const;

  // Marginal over the named axes, in the order given.
  JointPmf marginal(const std::vector<std::string>& names) const;
  Pmf flatten() const { return Pmf(table_); }

 private:
  std::vector<Axis> axes_;
  std::vector<double> table_;
  std::vector<std::size_t> strides_;
};

// Information measures, all in bits. 0*log 0 = 0 throughout, and
// p*log(p/0) = +infinity.
double entropy(const Pmf& p);
double entropy(const JointPmf& j);
double entropy_of(const JointPmf& j, const std::vector<std::string>& axes);
double conditional_entropy(const JointPmf& j, const std::vector<std::string>& target,
                           const std::vector<std::string>& given);
double mutual_information(const JointPmf& j, const std::vector<std::string>& a,
                          const std::vector<std::string>& b);
double min_star(const Pmf& p);
double total_variation(const Pmf& p, const Pmf& q);
double total_variation(const JointPmf& p, const JointPmf& q);
double kl_divergence(const Pmf& p, const Pmf& q);

double binary_entropy(double p);

}  // namespace coordsim
