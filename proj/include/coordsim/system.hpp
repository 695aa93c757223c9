#pragma once

// The factorized joint P_AC * P_X|AC * P_B|A * P_Y|BC that defines both the
// coordination target and the synthesis chain.

#include <optional>

#include "coordsim/pmf.hpp"

namespace coordsim {

// Pair-alphabet flattening convention used everywhere a kernel is
// conditioned on two variables: index = first * |second| + second,
// with (A,C) ordering for P_X|AC and (B,C) for P_Y|BC.
inline std::size_t pair_index(std::size_t first, std::size_t second, std::size_t second_size) {
  return first * second_size + second;
}

class CoordinationSystem {
 public:
  // q_xy_override, when present, must match the composed (X,Y) marginal
  // within kComposeTol; otherwise the target is derived from the kernels.
  CoordinationSystem(JointPmf p_ac, Channel p_x_given_ac, Channel p_b_given_a,
                     Channel p_y_given_bc, std::optional<JointPmf> q_xy_override = std::nullopt);

  const JointPmf& p_ac() const { return p_ac_; }
  const Channel& p_x_given_ac() const { return p_x_given_ac_; }
  const Channel& p_b_given_a() const { return p_b_given_a_; }
  const Channel& p_y_given_bc() const { return p_y_given_bc_; }
  const JointPmf& q_xy() const { return q_xy_; }

  std::size_t a_size() const { return p_ac_.axes()[0].size; }
  std::size_t c_size() const { return p_ac_.axes()[1].size; }
  std::size_t x_size() const { return p_x_given_ac_.output_size(); }
  std::size_t b_size() const { return p_b_given_a_.output_size(); }
  std::size_t y_size() const { return p_y_given_bc_.output_size(); }

 private:
  JointPmf p_ac_;            // axes (A, C)
  Channel p_x_given_ac_;     // input (a,c)
  Channel p_b_given_a_;
  Channel p_y_given_bc_;     // input (b,c)
  JointPmf q_xy_;            // axes (X, Y)
};

// Full 5-axis joint with axes (X, Y, A, B, C).
JointPmf compose_joint(const CoordinationSystem& sys);

struct DegradationResult {
  bool degraded = false;
  // One feasible kernel D with weak = strong composed with D, when degraded.
  std::optional<Channel> witness;
};

// True iff `weak` is physically degraded with respect to `strong`.  Solved as
// exact feasibility of a small linear program (alphabets are desk-scale).
DegradationResult degradation_check(const Channel& strong, const Channel& weak);

}  // namespace coordsim
