// Compares the OpenMP kernels against their serial reference
// implementations: Monte Carlo cycle simulation and the optimizer grid scan.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "handover/mc_sim.hpp"
#include "handover/optimizer.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void bench_simulate(std::int64_t cycles) {
  handover::SimConfig cfg;
  cfg.law = handover::ArrivalLaw{handover::DelayDistribution::exponential_unit(), 0.0};
  cfg.A = 0.7;
  cfg.rates = handover::CostRates{1.0, 1.0};
  cfg.cycles = cycles;
  cfg.seed = 20240917;

  auto start = Clock::now();
  const handover::SimReport serial = handover::simulate_serial(cfg);
  const double t_serial = seconds_since(start);

  start = Clock::now();
  const handover::SimReport parallel = handover::simulate(cfg);
  const double t_parallel = seconds_since(start);

  const double drift = std::abs(parallel.mean_cost - serial.mean_cost) /
                       std::max(1.0, std::abs(serial.mean_cost));
  std::printf("simulate      %9lld cycles  serial %7.3fs  omp(%d) %7.3fs  speedup %5.2fx  "
              "mean drift %.2e\n",
              static_cast<long long>(cycles), t_serial, threads(), t_parallel,
              t_serial / t_parallel, drift);
  if (parallel.hist_visits != serial.hist_visits || parallel.recalibrations != serial.recalibrations)
    std::printf("  WARNING: integer aggregates diverged between serial and parallel runs\n");
}

void bench_grid(int n) {
  const auto delay = handover::DelayDistribution::exponential_unit();
  handover::SearchDomain domain = handover::default_domain(delay);
  domain.n_t = n;
  domain.n_A = n;
  const handover::CostRates rates{1.0, 1.0};

  auto start = Clock::now();
  const handover::GridBest serial = handover::brute_force_grid(delay, rates, domain);
  const double t_serial = seconds_since(start);

  start = Clock::now();
  const handover::GridScan scan = handover::scan_grid(delay, domain);
  const handover::GridBest parallel = handover::grid_argmin(scan, rates);
  const double t_parallel = seconds_since(start);

  std::printf("grid scan     %5d x %-5d nodes  serial %7.3fs  omp(%d) %7.3fs  speedup %5.2fx\n", n,
              n, t_serial, threads(), t_parallel, t_serial / t_parallel);
  if (serial.i_t != parallel.i_t || serial.i_A != parallel.i_A || serial.cost != parallel.cost)
    std::printf("  WARNING: argmin diverged between serial and parallel scans\n");
}

}  // namespace

int main(int argc, char** argv) {
  std::int64_t cycles = 4'000'000;
  int grid = 200;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--cycles") == 0 && i + 1 < argc)
      cycles = std::atoll(argv[++i]);
    else if (std::strcmp(argv[i], "--grid") == 0 && i + 1 < argc)
      grid = std::atoi(argv[++i]);
  }
  std::printf("handover benchmark (%d thread%s)\n", threads(), threads() == 1 ? "" : "s");
  bench_simulate(cycles);
  bench_grid(grid);
  return 0;
}
