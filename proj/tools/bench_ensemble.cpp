// Benchmarks the parallel ensemble runner against the serial reference and
// verifies that both produce identical trajectories.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include <omp.h>

#include "mtnls/measure.hpp"

using namespace mtnls;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

bool identical(const std::vector<TrajectorySeries>& a,
               const std::vector<TrajectorySeries>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].t != b[k].t || a[k].M != b[k].M || a[k].E != b[k].E ||
        a[k].Mtot != b[k].Mtot || a[k].H1 != b[k].H1)
      return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  int K = 64;
  int workers = omp_get_max_threads();
  if (argc > 1) K = std::stoi(argv[1]);
  if (argc > 2) workers = std::stoi(argv[2]);

  BasisPtr basis = make_basis(BasisKind::TorusFourier, 4);
  ModelParams params;
  params.beta = 0.5;
  params.gamma = 2.5;
  params.C = 1.0;
  params.C1 = 1.0;
  NoiseSpec noise = NoiseSpec::power_law(*basis, 1.5, 0.1);

  EnsembleSpec spec;
  spec.trajectories = static_cast<std::size_t>(K);
  spec.horizon = 1.0;
  StepperConfig config;
  config.h = 1e-2;
  config.stride = 10;
  config.seed = 42;

  std::printf("trajectories=%d workers=%d torus K=4 h=%g T=%g\n", K, workers,
              config.h, spec.horizon);

  auto t0 = std::chrono::steady_clock::now();
  auto serial = run_ensemble_serial(spec, params, noise, config, basis);
  const double ts = seconds_since(t0);
  std::printf("serial:   %8.3f s\n", ts);

  t0 = std::chrono::steady_clock::now();
  auto parallel = run_ensemble(spec, params, noise, config, basis, workers);
  const double tp = seconds_since(t0);
  std::printf("parallel: %8.3f s  speedup %.2fx\n", tp, ts / tp);

  if (!identical(serial, parallel)) {
    std::printf("MISMATCH: parallel and serial trajectories differ\n");
    return 1;
  }
  std::printf("outputs identical\n");
  return 0;
}
