#include "coordsim/sets.hpp"
#include <cstring>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace coordsim {

const std::vector<ProfileLabel>& all_profile_labels() {
  static const std::vector<ProfileLabel> labels = {
      ProfileLabel::c_alone,   ProfileLabel::c_given_x,  ProfileLabel::c_given_xy,
      ProfileLabel::c_given_b, ProfileLabel::c_given_a,  ProfileLabel::a_alone,
      ProfileLabel::a_given_c, ProfileLabel::a_given_cx, ProfileLabel::a_given_cxy,
      ProfileLabel::y_given_bc};
  return labels;
}

std::string profile_label_name(ProfileLabel label) {
  switch (label) {
    case ProfileLabel::c_alone: return "C";
    case ProfileLabel::c_given_x: return "C|X";
    case ProfileLabel::c_given_xy: return "C|XY";
    case ProfileLabel::c_given_b: return "C|B";
    case ProfileLabel::c_given_a: return "C|A";
    case ProfileLabel::a_alone: return "A";
    case ProfileLabel::a_given_c: return "A|C";
    case ProfileLabel::a_given_cx: return "A|CX";
    case ProfileLabel::a_given_cxy: return "A|CXY";
    case ProfileLabel::y_given_bc: return "Y|BC";
  }
  return "?";
}

const EntropyProfile& PolarSpectrum::at(ProfileLabel label) const {
  auto it = profiles.find(label);
  if (it == profiles.end())
    throw std::invalid_argument("PolarSpectrum: missing profile " + profile_label_name(label));
  return it->second;
}

SymbolJoint symbol_joint_for(const JointPmf& full, ProfileLabel label) {
  // Marginal with V first, then the conditioning tuple in a fixed order.
  auto build = [&](const std::string& v, const std::vector<std::string>& s) {
    std::vector<std::string> names = {v};
    names.insert(names.end(), s.begin(), s.end());
    JointPmf m = full.marginal(names);
    std::size_t s_cells = 1;
    for (std::size_t i = 1; i < m.axes().size(); ++i) s_cells *= m.axes()[i].size;
    if (m.axes()[0].size != 2)
      throw std::invalid_argument("symbol_joint_for: variable " + v + " is not binary");
    return SymbolJoint(m.table(), s_cells);
  };
  switch (label) {
    case ProfileLabel::c_alone: return build("C", {});
    case ProfileLabel::c_given_x: return build("C", {"X"});
    case ProfileLabel::c_given_xy: return build("C", {"X", "Y"});
    case ProfileLabel::c_given_b: return build("C", {"B"});
    case ProfileLabel::c_given_a: return build("C", {"A"});
    case ProfileLabel::a_alone: return build("A", {});
    case ProfileLabel::a_given_c: return build("A", {"C"});
    case ProfileLabel::a_given_cx: return build("A", {"C", "X"});
    case ProfileLabel::a_given_cxy: return build("A", {"C", "X", "Y"});
    case ProfileLabel::y_given_bc: return build("Y", {"B", "C"});
  }
  throw std::logic_error("symbol_joint_for: unknown label");
}

PolarSpectrum build_spectrum(const CoordinationSystem& sys, int n, int num_samples,
                             uint64_t seed) {
  if (sys.c_size() != 2 || sys.a_size() != 2)
    throw std::invalid_argument("build_spectrum: C and A must be binary");
  if (sys.y_size() > 2)
    throw std::invalid_argument("build_spectrum: Y must be binary for the synthesis profile");
  const JointPmf full = compose_joint(sys);
  PolarSpectrum spec;
  spec.n = n;
  spec.samples = num_samples;
  spec.seed = seed;
  for (ProfileLabel label : all_profile_labels()) {
    if (label == ProfileLabel::y_given_bc && sys.y_size() < 2) {
      // Degenerate Y: every conditional entropy is exactly zero.
      EntropyProfile p;
      p.samples = num_samples;
      p.mean.assign(std::size_t{1} << n, 0.0);
      p.std_err.assign(std::size_t{1} << n, 0.0);
      spec.profiles.emplace(label, std::move(p));
      continue;
    }
    SymbolJoint sj = symbol_joint_for(full, label);
    // Seed by the joint's content: labels with identical conditioning get
    // identical estimates, matching the theory exactly.
    uint64_t content = 0xcbf29ce484222325ULL ^ sj.s_size;
    for (double v : sj.table) {
      uint64_t bits;
      static_assert(sizeof bits == sizeof v);
      std::memcpy(&bits, &v, sizeof bits);
      content = splitmix64(content ^ bits);
    }
    spec.profiles.emplace(label, entropy_profile(sj, n, num_samples, mix_seed(seed, content)));
  }
  return spec;
}

namespace {

IndexSet above(const EntropyProfile& prof, double bar) {
  const int len = static_cast<int>(prof.mean.size());
  IndexSet s(len);
  for (int i = 0; i < len; ++i)
    if (prof.mean[i] > bar) s.insert(i);
  return s;
}

}  // namespace

SetFamily threshold_sets(const PolarSpectrum& spec, double eps_vh, double eps_h) {
  if (!(eps_h > 0.0) || !(eps_h <= eps_vh) || !(eps_vh < 1.0))
    throw std::invalid_argument("threshold_sets: need 0 < eps_h <= eps_vh < 1");
  SetFamily fam;
  fam.n = spec.n;
  fam.eps_vh = eps_vh;
  fam.eps_h = eps_h;
  fam.v_c = above(spec.at(ProfileLabel::c_alone), 1.0 - eps_vh);
  fam.v_c_x = above(spec.at(ProfileLabel::c_given_x), 1.0 - eps_vh);
  fam.v_c_xy = above(spec.at(ProfileLabel::c_given_xy), 1.0 - eps_vh);
  fam.h_c_b = above(spec.at(ProfileLabel::c_given_b), eps_h);
  fam.h_c_a = above(spec.at(ProfileLabel::c_given_a), eps_h);
  fam.v_a = above(spec.at(ProfileLabel::a_alone), 1.0 - eps_vh);
  fam.v_a_c = above(spec.at(ProfileLabel::a_given_c), 1.0 - eps_vh);
  fam.v_a_cx = above(spec.at(ProfileLabel::a_given_cx), 1.0 - eps_vh);
  fam.v_a_cxy = above(spec.at(ProfileLabel::a_given_cxy), 1.0 - eps_vh);
  fam.v_y_bc = above(spec.at(ProfileLabel::y_given_bc), 1.0 - eps_vh);  // log2|Y| = 1 in scope

  // Enforce theoretical nesting.
  fam.v_c_x = fam.v_c_x.intersect(fam.v_c);
  fam.v_c_xy = fam.v_c_xy.intersect(fam.v_c_x);
  fam.v_a_c = fam.v_a_c.intersect(fam.v_a);
  fam.v_a_cx = fam.v_a_cx.intersect(fam.v_a_c);
  fam.v_a_cxy = fam.v_a_cxy.intersect(fam.v_a_cx);
  return fam;
}

SetFamily derive_partition(SetFamily fam) {
  if (!fam.v_c_xy.is_subset_of(fam.v_c_x) || !fam.v_c_x.is_subset_of(fam.v_c) ||
      !fam.v_a_cxy.is_subset_of(fam.v_a_cx) || !fam.v_a_cx.is_subset_of(fam.v_a_c) ||
      !fam.v_a_c.is_subset_of(fam.v_a))
    throw std::invalid_argument("derive_partition: nesting violated");
  const IndexSet h_comp = fam.h_c_b.complement();
  fam.f1 = fam.v_c_x.minus(fam.v_c_xy).intersect(h_comp);
  fam.f2 = fam.v_c_xy.intersect(h_comp);
  fam.f4 = fam.v_c_x.intersect(fam.h_c_b);      // H_{C|BX}
  fam.f4hat = fam.v_c_xy.intersect(fam.h_c_b);  // H_{C|BXY}
  fam.f4check = fam.f4.minus(fam.f4hat);
  fam.f3 = fam.h_c_b.minus(fam.f4);
  fam.f5 = fam.v_c.minus(fam.v_c_x).intersect(h_comp);
  fam.f6 = fam.v_a_cx.minus(fam.v_a_cxy);
  fam.f7 = fam.v_a_cxy;
  fam.f8 = fam.v_a_c.minus(fam.v_a_cx);
  fam.f9 = fam.v_a.minus(fam.v_a_c);
  fam.partition_filled = true;
  return fam;
}

ChainLayout chain_layout(const SetFamily& fam, int k) {
  if (!fam.partition_filled) throw std::invalid_argument("chain_layout: partition not derived");
  if (k < 1) throw std::invalid_argument("chain_layout: k must be >= 1");
  const int f1 = fam.f1.count();
  const int f2 = fam.f2.count();
  const int f3 = fam.f3.count();
  if (f3 > f1 + f2)
    throw DecodabilityError("decodability constraint violated: |F3|=" + std::to_string(f3) +
                            " > |F1|+|F2|=" + std::to_string(f1) + "+" + std::to_string(f2));
  ChainLayout layout;
  layout.k = k;
  if (f3 > 0) {
    layout.f31_size = (f1 * f3) / (f1 + f2);  // floor; remainder goes to F32
    layout.f32_size = f3 - layout.f31_size;
  }
  layout.f31_acute = fam.f1.lowest(layout.f31_size);
  layout.f32_acute = fam.f2.lowest(layout.f32_size);
  layout.j_block_bits = fam.f1.unite(fam.f4check).count();
  layout.j1_bar_bits = fam.f2.unite(fam.f4hat).count();
  layout.j2_bar_bits = fam.f7.count();
  layout.m1_block_bits = fam.f6.count();
  return layout;
}

AlignmentReport alignment_check(const SetFamily& fam) {
  AlignmentReport rep;
  rep.violations = fam.h_c_a.minus(fam.h_c_b).to_vector();
  return rep;
}

IndexSet top_entropy_indices(const EntropyProfile& profile, int count) {
  const int len = static_cast<int>(profile.mean.size());
  if (count < 0 || count > len) throw std::invalid_argument("top_entropy_indices: bad count");
  std::vector<int> order(len);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return profile.mean[a] > profile.mean[b]; });
  IndexSet s(len);
  for (int i = 0; i < count; ++i) s.insert(order[i]);
  return s;
}

}  // namespace coordsim
