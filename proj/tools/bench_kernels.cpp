// Benchmark comparing the OpenMP kernels against their serial reference
// implementations: Monte-Carlo entropy profiling and experiment trials.

#include <chrono>
#include <cstdio>

#include "coordsim/sc.hpp"
#include "coordsim/sim.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using namespace coordsim;

template <typename F>
double time_call(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

CoordinationSystem chain_system() {
  JointPmf p_ac({{"A", 2}, {"C", 2}}, {0.5, 0.0, 0.0, 0.5});
  std::vector<Pmf> x_rows;
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t c = 0; c < 2; ++c) x_rows.push_back(Pmf::bernoulli(c ? 0.9 : 0.1));
  std::vector<Pmf> y_rows;
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t c = 0; c < 2; ++c) y_rows.push_back(Pmf::point_mass(2, b));
  return CoordinationSystem(p_ac, Channel(x_rows), Channel::bsc(0.02), Channel(y_rows));
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP disabled; both columns run serially\n");
#endif

  {
    SymbolJoint sj({0.45, 0.05, 0.05, 0.45}, 2);
    const int n = 10, samples = 500;
    EntropyProfile serial, parallel;
    const double ts = time_call([&] { serial = entropy_profile_serial(sj, n, samples, 7); });
    const double tp = time_call([&] { parallel = entropy_profile(sj, n, samples, 7); });
    bool identical = serial.mean == parallel.mean && serial.std_err == parallel.std_err;
    std::printf("entropy_profile  n=%d M=%d   serial %.3fs   openmp %.3fs   speedup %.2fx   "
                "identical=%s\n",
                n, samples, ts, tp, ts / tp, identical ? "yes" : "NO");
  }

  {
    ExperimentConfig cfg(chain_system());
    cfg.n = 8;
    cfg.k = 2;
    cfg.trials = 100;
    cfg.spectrum_samples = 400;
    cfg.mode = DecodeMode::sample;
    BuildArtifacts art = build_artifacts(cfg);
    SimReport serial, parallel;
    const double ts = time_call([&] { serial = run_experiment_serial(cfg, art); });
    const double tp = time_call([&] { parallel = run_experiment(cfg, art); });
    bool identical = serial.empirical_xy == parallel.empirical_xy && serial.tv == parallel.tv;
    std::printf("run_experiment   n=%d trials=%d  serial %.3fs   openmp %.3fs   speedup %.2fx   "
                "identical=%s\n",
                cfg.n, cfg.trials, ts, tp, ts / tp, identical ? "yes" : "NO");
  }
  return 0;
}
