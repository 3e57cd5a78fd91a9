#include <cmath>
#include <vector>

#include <doctest.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "handover/mc_sim.hpp"
#include "handover/optimizer.hpp"

using namespace handover;

namespace {

SimConfig base_config(DelayDistribution delay, double t, double A, std::int64_t cycles,
                      std::uint64_t seed) {
  SimConfig cfg;
  cfg.law = ArrivalLaw{std::move(delay), t};
  cfg.A = A;
  cfg.rates = CostRates{1.0, 1.0};
  cfg.cycles = cycles;
  cfg.seed = seed;
  return cfg;
}

bool reports_equal(const SimReport& a, const SimReport& b) {
  return a.mean_cost == b.mean_cost && a.se_cost == b.se_cost &&
         a.mean_waiting == b.mean_waiting && a.mean_visits == b.mean_visits &&
         a.hist_visits == b.hist_visits && a.recalibrations == b.recalibrations &&
         a.cycles_run == b.cycles_run;
}

}  // namespace

TEST_CASE("deterministic arrival: exact per-cycle outcome, zero spread") {
  SimConfig cfg = base_config(DelayDistribution::shifted_deterministic(0.0), 0.3, 0.5, 20'000, 1);
  const SimReport r = simulate(cfg);
  CHECK(r.mean_waiting == doctest::Approx(0.2).epsilon(1e-12));  // sum rounding only
  CHECK(r.se_cost == 0.0);
  CHECK(r.mean_visits == 1.0);
  CHECK(r.mean_cost == doctest::Approx(0.2 + 1.0 / 0.5).epsilon(1e-15));
  CHECK(r.hist_visits.size() == 1);
  CHECK(r.hist_visits.at(1) == 20'000);
  CHECK(r.cycles_run == 20'000);
}

TEST_CASE("same seed, same report; worker count does not matter") {
  SimConfig cfg = base_config(DelayDistribution::exponential_unit(), 0.2, 0.8, 100'000, 99);
  const SimReport a = simulate(cfg);
  const SimReport b = simulate(cfg);
  CHECK(reports_equal(a, b));
#ifdef _OPENMP
  const int saved = omp_get_max_threads();
  for (int threads : {1, 2, 5}) {
    omp_set_num_threads(threads);
    const SimReport c = simulate(cfg);
    CHECK(reports_equal(a, c));
  }
  omp_set_num_threads(saved);
#endif
}

TEST_CASE("parallel blocks agree with the serial reference") {
  SimConfig cfg = base_config(DelayDistribution::exponential_unit(), 0.1, 0.7, 300'000, 4242);
  cfg.recalibration_threshold = 0.5;
  const SimReport par = simulate(cfg);
  const SimReport ser = simulate_serial(cfg);
  CHECK(par.hist_visits == ser.hist_visits);
  CHECK(par.recalibrations == ser.recalibrations);
  CHECK(par.cycles_run == ser.cycles_run);
  CHECK(par.mean_visits == ser.mean_visits);  // integer sums divide identically
  CHECK(par.mean_cost == doctest::Approx(ser.mean_cost).epsilon(1e-12));
  CHECK(par.mean_waiting == doctest::Approx(ser.mean_waiting).epsilon(1e-12));
  CHECK(par.se_cost == doctest::Approx(ser.se_cost).epsilon(1e-9));
}

TEST_CASE("visit histogram is consistent with the mean") {
  SimConfig cfg = base_config(DelayDistribution::exponential_unit(), 0.0, 0.6, 200'000, 7);
  const SimReport r = simulate(cfg);
  std::uint64_t weighted = 0, total = 0;
  for (const auto& [visits, count] : r.hist_visits) {
    weighted += static_cast<std::uint64_t>(visits) * count;
    total += count;
  }
  CHECK(total == static_cast<std::uint64_t>(r.cycles_run));
  CHECK(static_cast<double>(weighted) / static_cast<double>(r.cycles_run) == r.mean_visits);
}

TEST_CASE("exp case study: visit count matches the closed form within 3 se") {
  constexpr double kLn2 = 0.6931471805599453;
  SimConfig cfg = base_config(DelayDistribution::exponential_unit(), 0.0, kLn2, 1'000'000, 11);
  cfg.rates = CostRates{0.0, kLn2};  // cost == visit count, so se_cost is its se
  const SimReport r = simulate(cfg);
  CHECK(std::abs(r.mean_visits - 2.0) <= 3.0 * r.se_cost);
  CHECK(r.mean_visits >= 1.0);
}

TEST_CASE("protocol (ii) waiting stays below one period for positive arrivals") {
  SimConfig cfg = base_config(DelayDistribution::uniform_unit(), 0.3, 0.7, 50'000, 5);
  const SimReport r = simulate(cfg);
  CHECK(r.mean_waiting < 0.7);
  CHECK(r.mean_waiting > 0.0);
}

TEST_CASE("compare_protocols shares the draws") {
  {
    // human always at 0: both protocols make it wait exactly one period
    const auto [never, first] =
        compare_protocols(ArrivalLaw{DelayDistribution::shifted_deterministic(0.0), 0.0}, 1.0,
                          CostRates{1.0, 1.0}, 10'000, 3, 0.5);
    CHECK(never.mean_waiting == 1.0);
    CHECK(first.mean_waiting == 1.0);
    CHECK(never.mean_visits == 1.0);
    CHECK(first.mean_visits == 1.0);
    CHECK(never.mean_cost == doctest::Approx(2.0).epsilon(1e-15));  // wait + one visit
    CHECK(first.mean_cost == doctest::Approx(1.0).epsilon(1e-15));  // robot never idles here
  }
  {
    // re-running with the same seed leaves both reports unchanged
    const ArrivalLaw law{DelayDistribution::exponential_unit(), 0.0};
    const auto pair1 = compare_protocols(law, 1.0, CostRates{1.0, 1.0}, 50'000, 17, 0.25);
    const auto pair2 = compare_protocols(law, 1.0, CostRates{1.0, 1.0}, 50'000, 17, 0.25);
    CHECK(reports_equal(pair1.first, pair2.first));
    CHECK(reports_equal(pair1.second, pair2.second));
  }
}

TEST_CASE("protocol (i) human waiting matches E[(A - T)^+]") {
  // ch = 1 and a free-waiting robot make cost == human waiting
  const ArrivalLaw law{DelayDistribution::exponential_unit(), 0.0};
  SimConfig cfg;
  cfg.law = law;
  cfg.A = 1.0;
  cfg.rates = CostRates{1.0, 0.0};
  cfg.protocol = Protocol::FirstArrivalWaits;
  cfg.robot_wait_rate = 0.0;
  cfg.cycles = 1'000'000;
  cfg.seed = 23;
  const SimReport r = simulate(cfg);
  CHECK(std::abs(r.mean_waiting - 0.36787944117144233) <= 3.0 * r.se_cost);  // e^{-1}
}

TEST_CASE("recalibration counter") {
  SimConfig cfg = base_config(DelayDistribution::shifted_deterministic(0.0), 0.0, 1.0, 5'000, 2);
  cfg.recalibration_threshold = 0.5;  // realized waiting is 1.0 every cycle
  CHECK(simulate(cfg).recalibrations == 5'000);
  cfg.recalibration_threshold = 2.0;
  CHECK(simulate(cfg).recalibrations == 0);
  cfg.recalibration_threshold.reset();
  CHECK(simulate(cfg).recalibrations == 0);
}

TEST_CASE("config validation") {
  SimConfig cfg = base_config(DelayDistribution::uniform_unit(), 0.0, 1.0, 0, 1);
  CHECK_THROWS_AS(simulate(cfg), std::invalid_argument);
  cfg.cycles = 10;
  cfg.A = 0.0;
  CHECK_THROWS_AS(simulate(cfg), std::invalid_argument);
}

TEST_CASE("protocol (ii) simulation agrees with the series evaluator") {
  const std::vector<DelayDistribution> kinds = {
      DelayDistribution::uniform_unit(),
      DelayDistribution::exponential_unit(),
      DelayDistribution::uniform_interval(-0.2, 0.8),
      DelayDistribution::exponential_rate(2.5),
      DelayDistribution::shifted_deterministic(0.3),
      DelayDistribution::empirical({0.05, 0.2, 0.2, 0.7, 1.4}),
  };
  Rng rng(8675309);
  for (const auto& delay : kinds) {
    for (int trial = 0; trial < 10; ++trial) {
      const double t = 2.0 * rng.next_unit();
      const double A = 0.2 + 2.3 * rng.next_unit();
      SimConfig cfg = base_config(delay, t, A, 1'000'000, 1000 + 7 * trial);
      const SimReport r = simulate(cfg);
      const CostBreakdown bd = expected_cost(cfg.law, A, cfg.rates);
      const double slack = 3.0 * std::max(r.se_cost, 1e-12);  // exact laws have zero se
      CHECK(std::abs(r.mean_cost - bd.total_cost) <= slack);
    }
  }
}
