#pragma once

// Turns Monte-Carlo entropy profiles into the index-set families driving the
// nested code: very-high/high entropy sets, the F1..F9 partition, and the
// chaining layout used to carry noisy message bits across blocks.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "coordsim/sc.hpp"
#include "coordsim/system.hpp"
#include "coordsim/transform.hpp"

namespace coordsim {

enum class ProfileLabel {
  c_alone,   // H(U2^j | past)
  c_given_x,
  c_given_xy,
  c_given_b,
  c_given_a,
  a_alone,   // H(U1^j | past)
  a_given_c,
  a_given_cx,
  a_given_cxy,
  y_given_bc,  // H(T^j | past, B, C)
};

const std::vector<ProfileLabel>& all_profile_labels();
std::string profile_label_name(ProfileLabel label);

struct PolarSpectrum {
  int n = 0;
  int samples = 0;
  uint64_t seed = 0;
  std::map<ProfileLabel, EntropyProfile> profiles;

  const EntropyProfile& at(ProfileLabel label) const;
};

struct SetFamily {
  int n = 0;
  double eps_vh = 0.0, eps_h = 0.0;
  IndexSet v_c, v_c_x, v_c_xy, h_c_b, h_c_a;
  IndexSet v_a, v_a_c, v_a_cx, v_a_cxy;
  IndexSet v_y_bc;
  // Filled by derive_partition:
  IndexSet f1, f2, f3, f4, f4hat, f4check, f5, f6, f7, f8, f9;
  bool partition_filled = false;
};

struct ChainLayout {
  int k = 1;
  int f31_size = 0, f32_size = 0;
  IndexSet f31_acute, f32_acute;  // lowest-index subsets of F1 / F2
  // Randomness pool sizes per the construction.
  int j_block_bits = 0;   // |F1 u F4check|, fresh per block
  int j1_bar_bits = 0;    // |F2 u F4hat|, reused
  int j2_bar_bits = 0;    // |F7|, reused
  int m1_block_bits = 0;  // |F6|, fresh per block
};

class DecodabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The per-position joint of (V, S) for one profile label, derived from the
// composed system joint.
SymbolJoint symbol_joint_for(const JointPmf& full, ProfileLabel label);

// Runs the Monte-Carlo profiler for every label.  Requires binary C and A
// (and binary or degenerate Y for the synthesis profile).
PolarSpectrum build_spectrum(const CoordinationSystem& sys, int n, int num_samples, uint64_t seed);

// Raw V-/H-sets by thresholding; nesting is then enforced by intersection
// (independent Monte-Carlo estimates can violate it by noise alone).
SetFamily threshold_sets(const PolarSpectrum& spec, double eps_vh, double eps_h);

// Fills F1..F9 by set algebra on the raw sets.  H_{C|BX} and H_{C|BXY} are
// realized operationally as V_C_X n H_C_B and V_C_XY n H_C_B so the partition
// identities hold exactly at finite N.
SetFamily derive_partition(SetFamily fam);

// Chaining layout; throws DecodabilityError when |F3| > |F1| + |F2|.
ChainLayout chain_layout(const SetFamily& fam, int k);

struct AlignmentReport {
  std::vector<int> violations;  // indices in H_C_A but not in H_C_B
  bool aligned() const { return violations.empty(); }
};

// Degraded channels must satisfy H_C_B^c within H_C_A^c (equivalently
// L2 = V_C \ H_C_B within L1 = V_C \ H_C_A).
AlignmentReport alignment_check(const SetFamily& fam);

// Rate-targeted alternative to thresholding: the `count` indices with the
// largest profile entropy (ties to the lower index).
IndexSet top_entropy_indices(const EntropyProfile& profile, int count);

}  // namespace coordsim
