#pragma once

// The polar linear transform G_n = R F^{xn} over GF(2) (and its mod-q
// generalization for prime q), plus index-set bookkeeping.  Indices are
// 0-based throughout the library.

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace coordsim {

using BitWord = std::vector<uint8_t>;

inline constexpr int kMaxStages = 20;

bool is_power_of_two(std::size_t x);

// Permutation sending i to the reversal of its n-bit representation.
std::vector<uint32_t> bit_reversal_perm(int n);

// v -> v * G_n over GF(2), computed in O(N log N) butterfly form.
// G_n is an involution, so the same call inverts it.
BitWord polar_transform(const BitWord& v);

// Same butterfly with mod-q addition, q prime; q = 2 reduces to
// polar_transform.  Not an involution for q > 2.
std::vector<uint8_t> qary_transform(const std::vector<uint8_t>& v, int q);

// Subset of [0, N) with set algebra; results stay within the domain.
class IndexSet {
 public:
  IndexSet() = default;
  explicit IndexSet(int domain_size);
  IndexSet(int domain_size, std::initializer_list<int> members);

  static IndexSet full(int domain_size);

  int domain() const { return domain_; }
  int count() const;
  bool empty() const { return count() == 0; }
  bool contains(int i) const;
  void insert(int i);
  void erase(int i);

  IndexSet unite(const IndexSet& o) const;
  IndexSet intersect(const IndexSet& o) const;
  IndexSet minus(const IndexSet& o) const;
  IndexSet complement() const;
  bool is_subset_of(const IndexSet& o) const;
  bool operator==(const IndexSet& o) const;

  // Members in ascending order.
  std::vector<int> to_vector() const;
  // The k lowest members (deterministic tie-breaking for acute subsets).
  IndexSet lowest(int k) const;

 private:
  void check_domain(const IndexSet& o) const;
  int domain_ = 0;
  std::vector<uint64_t> bits_;
};

}  // namespace coordsim
