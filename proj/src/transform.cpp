#include "coordsim/transform.hpp"

#include <bit>
#include <stdexcept>

namespace coordsim {

bool is_power_of_two(std::size_t x) { return x != 0 && (x & (x - 1)) == 0; }

std::vector<uint32_t> bit_reversal_perm(int n) {
  if (n < 0 || n > kMaxStages) throw std::invalid_argument("bit_reversal_perm: n out of range");
  const uint32_t size = 1u << n;
  std::vector<uint32_t> perm(size);
  for (uint32_t i = 0; i < size; ++i) {
    uint32_t r = 0;
    for (int b = 0; b < n; ++b) r |= ((i >> b) & 1u) << (n - 1 - b);
    perm[i] = r;
  }
  return perm;
}

namespace {

int stages_for(std::size_t len) {
  if (!is_power_of_two(len)) throw std::invalid_argument("polar transform: length not a power of two");
  int n = std::countr_zero(len);
  if (n > kMaxStages) throw std::invalid_argument("polar transform: length too large");
  return n;
}

bool is_prime(int q) {
  if (q < 2) return false;
  for (int d = 2; d * d <= q; ++d)
    if (q % d == 0) return false;
  return true;
}

}  // namespace

BitWord polar_transform(const BitWord& v) {
  const std::size_t len = v.size();
  const int n = stages_for(len);
  BitWord w = v;
  for (int s = 0; s < n; ++s) {
    const std::size_t inc = std::size_t{1} << s;
    for (std::size_t j = 0; j < inc; ++j)
      for (std::size_t i = 0; i < len; i += 2 * inc) w[i + j] ^= w[i + j + inc];
  }
  const auto perm = bit_reversal_perm(n);
  BitWord out(len);
  for (std::size_t i = 0; i < len; ++i) out[i] = w[perm[i]];
  return out;
}

std::vector<uint8_t> qary_transform(const std::vector<uint8_t>& v, int q) {
  if (!is_prime(q)) throw std::invalid_argument("qary_transform: q must be prime");
  const std::size_t len = v.size();
  const int n = stages_for(len);
  std::vector<uint8_t> w = v;
  for (int s = 0; s < n; ++s) {
    const std::size_t inc = std::size_t{1} << s;
    for (std::size_t j = 0; j < inc; ++j)
      for (std::size_t i = 0; i < len; i += 2 * inc)
        w[i + j] = static_cast<uint8_t>((w[i + j] + w[i + j + inc]) % q);
  }
  const auto perm = bit_reversal_perm(n);
  std::vector<uint8_t> out(len);
  for (std::size_t i = 0; i < len; ++i) out[i] = w[perm[i]];
  return out;
}

IndexSet::IndexSet(int domain_size) : domain_(domain_size) {
  if (domain_size < 0) throw std::invalid_argument("IndexSet: negative domain");
  bits_.assign((static_cast<std::size_t>(domain_size) + 63) / 64, 0);
}

IndexSet::IndexSet(int domain_size, std::initializer_list<int> members) : IndexSet(domain_size) {
  for (int m : members) insert(m);
}

IndexSet IndexSet::full(int domain_size) {
  IndexSet s(domain_size);
  for (int i = 0; i < domain_size; ++i) s.insert(i);
  return s;
}

int IndexSet::count() const {
  int c = 0;
  for (uint64_t b : bits_) c += std::popcount(b);
  return c;
}

bool IndexSet::contains(int i) const {
  if (i < 0 || i >= domain_) return false;
  return (bits_[static_cast<std::size_t>(i) >> 6] >> (i & 63)) & 1u;
}

void IndexSet::insert(int i) {
  if (i < 0 || i >= domain_) throw std::out_of_range("IndexSet::insert");
  bits_[static_cast<std::size_t>(i) >> 6] |= uint64_t{1} << (i & 63);
}

void IndexSet::erase(int i) {
  if (i < 0 || i >= domain_) throw std::out_of_range("IndexSet::erase");
  bits_[static_cast<std::size_t>(i) >> 6] &= ~(uint64_t{1} << (i & 63));
}

void IndexSet::check_domain(const IndexSet& o) const {
  if (domain_ != o.domain_) throw std::invalid_argument("IndexSet: domain mismatch");
}

IndexSet IndexSet::unite(const IndexSet& o) const {
  check_domain(o);
  IndexSet r = *this;
  for (std::size_t i = 0; i < bits_.size(); ++i) r.bits_[i] |= o.bits_[i];
  return r;
}

IndexSet IndexSet::intersect(const IndexSet& o) const {
  check_domain(o);
  IndexSet r = *this;
  for (std::size_t i = 0; i < bits_.size(); ++i) r.bits_[i] &= o.bits_[i];
  return r;
}

IndexSet IndexSet::minus(const IndexSet& o) const {
  check_domain(o);
  IndexSet r = *this;
  for (std::size_t i = 0; i < bits_.size(); ++i) r.bits_[i] &= ~o.bits_[i];
  return r;
}

IndexSet IndexSet::complement() const {
  IndexSet r(domain_);
  for (int i = 0; i < domain_; ++i)
    if (!contains(i)) r.insert(i);
  return r;
}

bool IndexSet::is_subset_of(const IndexSet& o) const {
  check_domain(o);
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i] & ~o.bits_[i]) return false;
  return true;
}

bool IndexSet::operator==(const IndexSet& o) const {
  return domain_ == o.domain_ && bits_ == o.bits_;
}

std::vector<int> IndexSet::to_vector() const {
  std::vector<int> v;
  v.reserve(static_cast<std::size_t>(count()));
  for (int i = 0; i < domain_; ++i)
    if (contains(i)) v.push_back(i);
  return v;
}

IndexSet IndexSet::lowest(int k) const {
  IndexSet r(domain_);
  for (int i = 0; i < domain_ && k > 0; ++i)
    if (contains(i)) {
      r.insert(i);
      --k;
    }
  if (k > 0) throw std::invalid_argument("IndexSet::lowest: not enough members");
  return r;
}

}  // namespace coordsim
