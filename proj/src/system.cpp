#include "coordsim/system.hpp"

#include <cmath>
#include <stdexcept>

namespace coordsim {

namespace {

JointPmf compose_raw(const JointPmf& p_ac, const Channel& x_k, const Channel& b_k,
                     const Channel& y_k) {
  std::size_t na = p_ac.axes()[0].size;
  std::size_t nc = p_ac.axes()[1].size;
  std::size_t nx = x_k.output_size();
  std::size_t nb = b_k.output_size();
  std::size_t ny = y_k.output_size();
  if (x_k.input_size() != na * nc) throw std::invalid_argument("compose_joint: P_X|AC input size");
  if (b_k.input_size() != na) throw std::invalid_argument("compose_joint: P_B|A input size");
  if (y_k.input_size() != nb * nc) throw std::invalid_argument("compose_joint: P_Y|BC input size");

  std::vector<Axis> axes = {{"X", nx}, {"Y", ny}, {"A", na}, {"B", nb}, {"C", nc}};
  std::vector<double> table(nx * ny * na * nb * nc, 0.0);
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t c = 0; c < nc; ++c) {
      double pac = p_ac.at({a, c});
      if (pac == 0.0) continue;
      for (std::size_t x = 0; x < nx; ++x) {
        double px = x_k.prob(x, pair_index(a, c, nc));
        if (px == 0.0) continue;
        for (std::size_t b = 0; b < nb; ++b) {
          double pb = b_k.prob(b, a);
          if (pb == 0.0) continue;
          for (std::size_t y = 0; y < ny; ++y) {
            double py = y_k.prob(y, pair_index(b, c, nc));
            if (py == 0.0) continue;
            table[(((x * ny + y) * na + a) * nb + b) * nc + c] += pac * px * pb * py;
          }
        }
      }
    }
  return JointPmf(std::move(axes), std::move(table));
}

}  // namespace

CoordinationSystem::CoordinationSystem(JointPmf p_ac, Channel p_x_given_ac, Channel p_b_given_a,
                                       Channel p_y_given_bc, std::optional<JointPmf> q_xy_override)
    : p_ac_(std::move(p_ac)),
      p_x_given_ac_(std::move(p_x_given_ac)),
      p_b_given_a_(std::move(p_b_given_a)),
      p_y_given_bc_(std::move(p_y_given_bc)),
      q_xy_(compose_raw(p_ac_, p_x_given_ac_, p_b_given_a_, p_y_given_bc_).marginal({"X", "Y"})) {
  if (p_ac_.axes().size() != 2)
    throw std::invalid_argument("CoordinationSystem: p_ac must have axes (A, C)");
  if (q_xy_override) {
    if (total_variation(*q_xy_override, q_xy_) > kComposeTol)
      throw std::invalid_argument("CoordinationSystem: q_xy does not match composed marginal");
    q_xy_ = std::move(*q_xy_override);
  }
}

JointPmf compose_joint(const CoordinationSystem& sys) {
  JointPmf joint = compose_raw(sys.p_ac(), sys.p_x_given_ac(), sys.p_b_given_a(), sys.p_y_given_bc());
  if (total_variation(joint.marginal({"X", "Y"}), sys.q_xy()) > kComposeTol)
    throw std::logic_error("compose_joint: (X,Y) marginal drifted from target");
  return joint;
}

namespace {

// Phase-1 simplex (Bland's rule): minimize the sum of artificial variables
// subject to A x = b, x >= 0.  Returns true and the solution when the
// optimum is ~0.
bool lp_feasible(std::vector<std::vector<double>> a, std::vector<double> b,
                 std::vector<double>& x_out, double tol) {
  const std::size_t m = a.size();
  const std::size_t n = m == 0 ? 0 : a[0].size();
  // Make b non-negative.
  for (std::size_t r = 0; r < m; ++r)
    if (b[r] < 0.0) {
      b[r] = -b[r];
      for (double& v : a[r]) v = -v;
    }
  // Tableau with artificials appended: columns [0,n) original, [n,n+m) artificial.
  std::vector<std::vector<double>> t(m, std::vector<double>(n + m + 1, 0.0));
  std::vector<std::size_t> basis(m);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) t[r][c] = a[r][c];
    t[r][n + r] = 1.0;
    t[r][n + m] = b[r];
    basis[r] = n + r;
  }
  // Reduced costs for objective = sum of artificials.
  std::vector<double> cost(n + m, 0.0);
  for (std::size_t c = n; c < n + m; ++c) cost[c] = 1.0;
  std::vector<double> red(n + m + 1, 0.0);
  for (std::size_t c = 0; c <= n + m; ++c) {
    double s = (c < n + m) ? cost[c] : 0.0;
    for (std::size_t r = 0; r < m; ++r) s -= t[r][c];  // artificial basis has cost 1
    red[c] = s;
  }

  const double pivot_eps = 1e-12;
  for (std::size_t iter = 0; iter < 10000; ++iter) {
    std::size_t enter = n + m;
    for (std::size_t c = 0; c < n + m; ++c)
      if (red[c] < -1e-11) { enter = c; break; }  // Bland: first improving column
    if (enter == n + m) break;
    std::size_t leave = m;
    double best = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      if (t[r][enter] > pivot_eps) {
        double ratio = t[r][n + m] / t[r][enter];
        if (leave == m || ratio < best - 1e-15 ||
            (std::abs(ratio - best) <= 1e-15 && basis[r] < basis[leave])) {
          leave = r;
          best = ratio;
        }
      }
    }
    if (leave == m) break;  // unbounded cannot happen in phase 1
    double piv = t[leave][enter];
    for (double& v : t[leave]) v /= piv;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == leave) continue;
      double f = t[r][enter];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c <= n + m; ++c) t[r][c] -= f * t[leave][c];
    }
    double f = red[enter];
    for (std::size_t c = 0; c <= n + m; ++c) red[c] -= f * t[leave][c];
    basis[leave] = enter;
  }

  double objective = -red[n + m];
  if (objective > tol) return false;
  x_out.assign(n, 0.0);
  for (std::size_t r = 0; r < m; ++r)
    if (basis[r] < n) x_out[basis[r]] = std::max(0.0, t[r][n + m]);
  return true;
}

}  // namespace

DegradationResult degradation_check(const Channel& strong, const Channel& weak) {
  if (strong.input_size() != weak.input_size())
    throw std::invalid_argument("degradation_check: input alphabet mismatch");
  const std::size_t ni = strong.input_size();
  const std::size_t zs = strong.output_size();
  const std::size_t zw = weak.output_size();

  // Unknowns D[s][w] >= 0 with, for every input a and weak output w:
  //   sum_s strong(s|a) D[s][w] = weak(w|a)
  // and every row of D summing to one.
  const std::size_t nvars = zs * zw;
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  for (std::size_t in = 0; in < ni; ++in)
    for (std::size_t w = 0; w < zw; ++w) {
      std::vector<double> row(nvars, 0.0);
      for (std::size_t s = 0; s < zs; ++s) row[s * zw + w] = strong.prob(s, in);
      a.push_back(std::move(row));
      b.push_back(weak.prob(w, in));
    }
  for (std::size_t s = 0; s < zs; ++s) {
    std::vector<double> row(nvars, 0.0);
    for (std::size_t w = 0; w < zw; ++w) row[s * zw + w] = 1.0;
    a.push_back(std::move(row));
    b.push_back(1.0);
  }

  std::vector<double> x;
  if (!lp_feasible(std::move(a), std::move(b), x, 1e-7)) return {};

  std::vector<Pmf> rows;
  rows.reserve(zs);
  for (std::size_t s = 0; s < zs; ++s) {
    std::vector<double> r(x.begin() + static_cast<long>(s * zw),
                          x.begin() + static_cast<long>((s + 1) * zw));
    double sum = 0.0;
    for (double v : r) sum += v;
    if (sum <= 0.0) { r.assign(zw, 1.0 / static_cast<double>(zw)); sum = 1.0; }
    for (double& v : r) v /= sum;
    rows.emplace_back(std::move(r));
  }
  return {true, Channel(std::move(rows))};
}

}  // namespace coordsim
