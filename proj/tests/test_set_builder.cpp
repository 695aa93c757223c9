#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "coordsim/rng.hpp"
#include "coordsim/sets.hpp"

using namespace coordsim;

namespace {

// Spectrum with a chosen profile for selected labels and flat defaults
// elsewhere, for exercising the set algebra in isolation.
PolarSpectrum fake_spectrum(int n, const std::map<ProfileLabel, std::vector<double>>& given) {
  PolarSpectrum spec;
  spec.n = n;
  spec.samples = 1;
  const std::size_t len = std::size_t{1} << n;
  for (ProfileLabel label : all_profile_labels()) {
    EntropyProfile prof;
    prof.samples = 1;
    auto it = given.find(label);
    prof.mean = it != given.end() ? it->second : std::vector<double>(len, 0.0);
    prof.std_err.assign(len, 0.0);
    spec.profiles.emplace(label, std::move(prof));
  }
  return spec;
}

CoordinationSystem chain_system(double x_flip, double ch_flip) {
  // C ~ Bern(1/2), A = C, X = C xor Bern(x_flip), B = A xor Bern(ch_flip), Y = B.
  JointPmf p_ac({{"A", 2}, {"C", 2}}, {0.5, 0.0, 0.0, 0.5});
  std::vector<Pmf> x_rows;
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t c = 0; c < 2; ++c) x_rows.push_back(Pmf::bernoulli(c ? 1 - x_flip : x_flip));
  std::vector<Pmf> y_rows;
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t c = 0; c < 2; ++c) y_rows.push_back(Pmf::point_mass(2, b));
  return CoordinationSystem(p_ac, Channel(x_rows),
                            ch_flip == 0.0 ? Channel::identity(2) : Channel::bsc(ch_flip),
                            Channel(y_rows));
}

}  // namespace

TEST_CASE("threshold_sets direct thresholding") {
  auto spec = fake_spectrum(2, {{ProfileLabel::c_alone, {1.0, 0.2, 0.98, 0.0}}});
  SetFamily fam = threshold_sets(spec, 0.05, 0.05);
  CHECK(fam.v_c.to_vector() == std::vector<int>{0, 2});
  auto all_zero = fake_spectrum(2, {});
  SetFamily fam0 = threshold_sets(all_zero, 0.05, 0.05);
  CHECK(fam0.v_c.empty());
  CHECK(fam0.h_c_b.empty());
}

TEST_CASE("threshold_sets validates thresholds and is monotone in eps_vh") {
  auto spec = fake_spectrum(3, {{ProfileLabel::c_alone,
                                 {0.99, 0.9, 0.8, 0.7, 0.5, 0.3, 0.1, 0.02}}});
  CHECK_THROWS_AS(threshold_sets(spec, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(threshold_sets(spec, 0.05, 0.2), std::invalid_argument);
  int prev = -1;
  for (double eps : {0.05, 0.15, 0.35, 0.6}) {
    SetFamily fam = threshold_sets(spec, eps, 0.01);
    CHECK(fam.v_c.count() >= prev);
    prev = fam.v_c.count();
  }
}

TEST_CASE("raising eps_h can only shrink H-sets") {
  auto spec = fake_spectrum(3, {{ProfileLabel::c_given_b,
                                 {0.9, 0.62, 0.41, 0.3, 0.18, 0.07, 0.02, 0.0}}});
  int prev = 9;
  for (double eps_h : {0.05, 0.2, 0.5, 0.8}) {
    SetFamily fam = threshold_sets(spec, 0.9, eps_h);
    CHECK(fam.h_c_b.count() <= prev);
    prev = fam.h_c_b.count();
  }
}

TEST_CASE("derive_partition toy example") {
  const int n = 3;
  // 0-based translation of the toy sets.
  auto mk = [&](std::initializer_list<int> xs) { return IndexSet(1 << n, xs); };
  auto spec = fake_spectrum(n, {});
  SetFamily fam = threshold_sets(spec, 0.1, 0.1);
  fam.v_c = mk({0, 1, 2, 3, 4, 5});
  fam.v_c_x = mk({0, 1, 2, 3});
  fam.v_c_xy = mk({0, 1});
  fam.h_c_b = mk({3, 4, 6});
  fam = derive_partition(fam);
  CHECK(fam.f1.to_vector() == std::vector<int>{2});
  CHECK(fam.f2.to_vector() == std::vector<int>{0, 1});
  CHECK(fam.f3.to_vector() == std::vector<int>{4, 6});
  CHECK(fam.f4.to_vector() == std::vector<int>{3});
  CHECK(fam.f5.to_vector() == std::vector<int>{5});
}

TEST_CASE("partition identities on random nested families") {
  Rng rng(71);
  const int n = 5;
  const int len = 1 << n;
  for (int trial = 0; trial < 50; ++trial) {
    SetFamily fam = threshold_sets(fake_spectrum(n, {}), 0.1, 0.1);
    for (int i = 0; i < len; ++i) {
      const double u = rng.next_unit();
      if (u < 0.6) fam.v_c.insert(i);
      if (u < 0.4) fam.v_c_x.insert(i);
      if (u < 0.2) fam.v_c_xy.insert(i);
      if (rng.next_unit() < 0.3) fam.h_c_b.insert(i);
      const double w = rng.next_unit();
      if (w < 0.7) fam.v_a.insert(i);
      if (w < 0.5) fam.v_a_c.insert(i);
      if (w < 0.3) fam.v_a_cx.insert(i);
      if (w < 0.15) fam.v_a_cxy.insert(i);
    }
    fam = derive_partition(fam);
    // F1, F2, F5 partition V_C n H^c; F3 u F4 = H; F4hat/F4check split F4.
    CHECK(fam.f1.intersect(fam.f2).empty());
    CHECK(fam.f1.intersect(fam.f5).empty());
    CHECK(fam.f2.intersect(fam.f5).empty());
    CHECK(fam.f1.unite(fam.f2).unite(fam.f5) ==
          fam.v_c.intersect(fam.h_c_b.complement()));
    CHECK(fam.f3.intersect(fam.f4).empty());
    CHECK(fam.f3.unite(fam.f4) == fam.h_c_b);
    CHECK(fam.f4hat.unite(fam.f4check) == fam.f4);
    CHECK(fam.f4hat.intersect(fam.f4check).empty());
    CHECK(fam.f6.unite(fam.f7) == fam.v_a_cx);
    CHECK(fam.f6.intersect(fam.f7).empty());
    CHECK(fam.f8 == fam.v_a_c.minus(fam.v_a_cx));
    CHECK(fam.f9 == fam.v_a.minus(fam.v_a_c));
    // The pool identities behind the rate bookkeeping.
    CHECK(fam.f1.unite(fam.f4check) == fam.v_c_x.minus(fam.v_c_xy));
    CHECK(fam.f2.unite(fam.f4hat) == fam.v_c_xy);
  }
}

TEST_CASE("noiseless channel: F3 = F4 = empty and F1 u F2 u F5 = V_C") {
  auto spec = fake_spectrum(3, {{ProfileLabel::c_alone, {1, 1, 1, 1, 0.95, 0.4, 0.1, 0}},
                                {ProfileLabel::c_given_x, {1, 0.97, 0.3, 0.94, 0.2, 0.1, 0, 0}},
                                {ProfileLabel::c_given_xy, {0.98, 0.3, 0.1, 0.91, 0, 0, 0, 0}}});
  SetFamily fam = derive_partition(threshold_sets(spec, 0.1, 0.1));
  CHECK(fam.h_c_b.empty());
  CHECK(fam.f3.empty());
  CHECK(fam.f4.empty());
  CHECK(fam.f1.unite(fam.f2).unite(fam.f5) == fam.v_c);
}

TEST_CASE("chain_layout sizing and errors") {
  const int n = 4;
  auto base = [&] {
    SetFamily fam = threshold_sets(fake_spectrum(n, {}), 0.1, 0.1);
    return fam;
  };
  SUBCASE("no noisy bits: chaining disabled") {
    SetFamily fam = derive_partition(base());
    ChainLayout layout = chain_layout(fam, 3);
    CHECK(layout.f31_size == 0);
    CHECK(layout.f32_size == 0);
    CHECK(layout.f31_acute.empty());
  }
  SUBCASE("ratio partition of |F3| = 3 against |F1| = 6, |F2| = 3") {
    SetFamily fam = base();
    for (int i = 0; i < 9; ++i) fam.v_c.insert(i);
    for (int i = 0; i < 9; ++i) fam.v_c_x.insert(i);
    for (int i = 0; i < 3; ++i) fam.v_c_xy.insert(i);  // F2 = {0,1,2}
    for (int i = 9; i < 12; ++i) {
      fam.v_c.insert(i);
      fam.h_c_b.insert(i);  // F3 = {9,10,11}
    }
    fam = derive_partition(fam);
    REQUIRE(fam.f1.count() == 6);
    REQUIRE(fam.f2.count() == 3);
    REQUIRE(fam.f3.count() == 3);
    ChainLayout layout = chain_layout(fam, 2);
    CHECK(layout.f31_size == 2);
    CHECK(layout.f32_size == 1);
    CHECK(layout.f31_acute.to_vector() == std::vector<int>{3, 4});  // lowest F1 members
    CHECK(layout.f32_acute.to_vector() == std::vector<int>{0});
    CHECK(layout.f31_size + layout.f32_size == fam.f3.count());
    CHECK(layout.f31_acute.is_subset_of(fam.f1));
    CHECK(layout.f32_acute.is_subset_of(fam.f2));
  }
  SUBCASE("decodability violation reports the set sizes") {
    SetFamily fam = base();
    fam.v_c.insert(0);
    fam.v_c_x.insert(0);
    fam.v_c_xy.insert(0);  // F2 = {0}
    fam.v_c.insert(1);
    fam.v_c_x.insert(1);  // F1 = {1}
    for (int i = 2; i < 5; ++i) fam.h_c_b.insert(i);  // F3 = {2,3,4}
    fam = derive_partition(fam);
    CHECK_THROWS_WITH_AS(chain_layout(fam, 2),
                         "decodability constraint violated: |F3|=3 > |F1|+|F2|=1+1",
                         DecodabilityError);
  }
}

TEST_CASE("alignment check") {
  SUBCASE("constructed violation") {
    SetFamily fam = threshold_sets(fake_spectrum(3, {}), 0.1, 0.1);
    fam.h_c_a.insert(2);
    fam.h_c_a.insert(5);
    fam.h_c_b.insert(5);
    auto rep = alignment_check(fam);
    CHECK(rep.violations == std::vector<int>{2});
    CHECK_FALSE(rep.aligned());
  }
  SUBCASE("degraded profiles align") {
    SetFamily fam = threshold_sets(
        fake_spectrum(2, {{ProfileLabel::c_given_a, {0.3, 0.15, 0.05, 0.0}},
                          {ProfileLabel::c_given_b, {0.6, 0.4, 0.2, 0.05}}}),
        0.1, 0.1);
    CHECK(alignment_check(fam).aligned());
  }
}

TEST_CASE("build_spectrum: identical conditioning gives identical profiles") {
  // A = C and an identity channel make (C, B) and (C, A) the same joint.
  CoordinationSystem sys = chain_system(0.1, 0.0);
  PolarSpectrum spec = build_spectrum(sys, 3, 200, 5);
  const auto& cb = spec.at(ProfileLabel::c_given_b);
  const auto& ca = spec.at(ProfileLabel::c_given_a);
  for (std::size_t j = 0; j < cb.mean.size(); ++j) CHECK(cb.mean[j] == ca.mean[j]);
}

TEST_CASE("build_spectrum: independent side info matches no side info within noise") {
  // X independent of C: P_X|AC ignores (a, c).
  JointPmf p_ac({{"A", 2}, {"C", 2}}, {0.5, 0.0, 0.0, 0.5});
  std::vector<Pmf> x_rows(4, Pmf::bernoulli(0.35));
  std::vector<Pmf> y_rows;
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t c = 0; c < 2; ++c) y_rows.push_back(Pmf::point_mass(2, b));
  CoordinationSystem sys(p_ac, Channel(x_rows), Channel::identity(2), Channel(y_rows));
  PolarSpectrum spec = build_spectrum(sys, 3, 400, 5);
  const auto& c0 = spec.at(ProfileLabel::c_alone);
  const auto& cx = spec.at(ProfileLabel::c_given_x);
  for (std::size_t j = 0; j < c0.mean.size(); ++j) {
    const double tol = 3.0 * std::sqrt(c0.std_err[j] * c0.std_err[j] +
                                       cx.std_err[j] * cx.std_err[j]) +
                       1e-9;
    CHECK(std::abs(c0.mean[j] - cx.mean[j]) <= tol);
  }
}

TEST_CASE("build_spectrum: mean of C|X profile approaches h(0.1)") {
  CoordinationSystem sys = chain_system(0.1, 0.0);
  PolarSpectrum spec = build_spectrum(sys, 3, 1000, 5);
  const auto& cx = spec.at(ProfileLabel::c_given_x);
  double mean = 0.0, var = 0.0;
  for (std::size_t j = 0; j < cx.mean.size(); ++j) {
    mean += cx.mean[j] / static_cast<double>(cx.mean.size());
    var += cx.std_err[j] * cx.std_err[j] /
           (static_cast<double>(cx.mean.size()) * cx.mean.size());
  }
  CHECK(std::abs(mean - 0.4690) <= 3.0 * std::sqrt(var) + 0.01);
}

TEST_CASE("build_spectrum rejects non-binary auxiliaries") {
  JointPmf p_ac({{"A", 3}, {"C", 2}}, {0.2, 0.2, 0.2, 0.2, 0.1, 0.1});
  std::vector<Pmf> x_rows(6, Pmf::bernoulli(0.4));
  std::vector<Pmf> y_rows(6, Pmf::point_mass(3, 0));
  CHECK_THROWS_AS(
      build_spectrum(CoordinationSystem(p_ac, Channel(x_rows), Channel::identity(3),
                                        Channel(y_rows)),
                     2, 10, 1),
      std::invalid_argument);
}

TEST_CASE("top_entropy_indices picks the largest with stable ties") {
  EntropyProfile prof;
  prof.mean = {0.2, 0.9, 0.9, 0.1, 0.5};
  prof.std_err.assign(5, 0.0);
  CHECK(top_entropy_indices(prof, 3).to_vector() == std::vector<int>{1, 2, 4});
  CHECK(top_entropy_indices(prof, 0).empty());
  CHECK_THROWS_AS(top_entropy_indices(prof, 6), std::invalid_argument);
}
