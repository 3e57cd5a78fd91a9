#include "handover/mc_sim.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <vector>

namespace handover {

namespace {

// Cycles are aggregated in fixed-size blocks so the result does not depend
// on how many workers process them.
constexpr std::int64_t kBlock = 8192;
constexpr std::int64_t kHistSmall = 64;

struct CycleOutcome {
  double cost = 0.0;
  double waiting = 0.0;
  std::int64_t visits = 1;
};

CycleOutcome run_cycle(const SimConfig& cfg, double robot_rate, std::int64_t index) {
  Rng rng = Rng::substream(cfg.seed, static_cast<std::uint64_t>(index));
  const double T = cfg.law.t + cfg.law.delay.sample(rng);
  if (cfg.protocol == Protocol::RobotNeverWaits) {
    const RealizedOutcome o = realized_cost(T, ScheduleParams{cfg.law.t, cfg.A}, cfg.rates);
    return {o.cost, o.waiting, o.visits};
  }
  // First arrival waits: meeting at max(T, A), one visit per cycle.
  const double human_wait = std::max(cfg.A - T, 0.0);
  const double robot_wait = std::max(T - cfg.A, 0.0);
  return {cfg.rates.ch * human_wait + robot_rate * robot_wait, human_wait, 1};
}

struct BlockAgg {
  std::int64_t n = 0;
  double mean = 0.0;  // Welford over cost
  double m2 = 0.0;
  double sum_wait = 0.0;
  std::uint64_t sum_visits = 0;
  std::int64_t recal = 0;
  std::array<std::uint64_t, kHistSmall> hist_small{};
  std::map<std::int64_t, std::uint64_t> hist_big;

  void add(const CycleOutcome& o, const std::optional<double>& threshold) {
    ++n;
    const double d = o.cost - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (o.cost - mean);
    sum_wait += o.waiting;
    sum_visits += static_cast<std::uint64_t>(o.visits);
    if (threshold && o.waiting > *threshold) ++recal;
    if (o.visits >= 0 && o.visits < kHistSmall)
      ++hist_small[static_cast<std::size_t>(o.visits)];
    else
      ++hist_big[o.visits];
  }
};

double resolve_robot_rate(const SimConfig& cfg) {
  if (cfg.robot_wait_rate < 0.0) return cfg.rates.cr / cfg.A;
  if (!std::isfinite(cfg.robot_wait_rate))
    throw std::invalid_argument("robot_wait_rate must be finite");
  return cfg.robot_wait_rate;
}

void validate(const SimConfig& cfg) {
  if (cfg.cycles < 1) throw std::invalid_argument("cycles must be >= 1");
  handover::validate(ScheduleParams{cfg.law.t, cfg.A});
  handover::validate(cfg.rates);
  if (cfg.recalibration_threshold && !std::isfinite(*cfg.recalibration_threshold))
    throw std::invalid_argument("recalibration_threshold must be finite");
}

SimReport finalize(std::vector<BlockAgg>&& blocks, std::int64_t cycles) {
  // Merge in block order: parallel variance combination, exact integer sums.
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  double sum_wait = 0.0;
  std::uint64_t sum_visits = 0;
  std::int64_t recal = 0;
  SimReport r;
  for (const BlockAgg& b : blocks) {
    if (b.n == 0) continue;
    const auto na = static_cast<double>(n);
    const auto nb = static_cast<double>(b.n);
    const double delta = b.mean - mean;
    const double nt = na + nb;
    mean += delta * (nb / nt);
    m2 += b.m2 + delta * delta * (na * nb / nt);
    n += b.n;
    sum_wait += b.sum_wait;
    sum_visits += b.sum_visits;
    recal += b.recal;
    for (std::int64_t v = 0; v < kHistSmall; ++v)
      if (b.hist_small[static_cast<std::size_t>(v)] > 0)
        r.hist_visits[v] += b.hist_small[static_cast<std::size_t>(v)];
    for (const auto& [v, c] : b.hist_big) r.hist_visits[v] += c;
  }
  r.mean_cost = mean;
  r.se_cost = n >= 2 ? std::sqrt(m2 / (static_cast<double>(n) * static_cast<double>(n - 1))) : 0.0;
  r.mean_waiting = sum_wait / static_cast<double>(n);
  r.mean_visits = static_cast<double>(sum_visits) / static_cast<double>(n);
  r.recalibrations = recal;
  r.cycles_run = cycles;
  return r;
}

}  // namespace

SimReport simulate(const SimConfig& config) {
  validate(config);
  const double robot_rate = resolve_robot_rate(config);
  const std::int64_t blocks = (config.cycles + kBlock - 1) / kBlock;
  std::vector<BlockAgg> aggs(static_cast<std::size_t>(blocks));
  std::atomic<bool> failed{false};
  std::exception_ptr eptr = nullptr;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t b = 0; b < blocks; ++b) {
    if (failed.load(std::memory_order_relaxed)) continue;
    try {
      BlockAgg& agg = aggs[static_cast<std::size_t>(b)];
      const std::int64_t lo = b * kBlock;
      const std::int64_t hi = std::min(lo + kBlock, config.cycles);
      for (std::int64_t i = lo; i < hi; ++i) agg.add(run_cycle(config, robot_rate, i),
                                                     config.recalibration_threshold);
    } catch (...) {
#pragma omp critical(handover_sim_err)
      {
        if (!failed.exchange(true)) eptr = std::current_exception();
      }
    }
  }
  if (eptr) std::rethrow_exception(eptr);
  return finalize(std::move(aggs), config.cycles);
}

SimReport simulate_serial(const SimConfig& config) {
  validate(config);
  const double robot_rate = resolve_robot_rate(config);
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  double sum_wait = 0.0;
  std::uint64_t sum_visits = 0;
  SimReport r;
  for (std::int64_t i = 0; i < config.cycles; ++i) {
    const CycleOutcome o = run_cycle(config, robot_rate, i);
    ++n;
    const double d = o.cost - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (o.cost - mean);
    sum_wait += o.waiting;
    sum_visits += static_cast<std::uint64_t>(o.visits);
    if (config.recalibration_threshold && o.waiting > *config.recalibration_threshold)
      ++r.recalibrations;
    ++r.hist_visits[o.visits];
  }
  r.mean_cost = mean;
  r.se_cost = n >= 2 ? std::sqrt(m2 / (static_cast<double>(n) * static_cast<double>(n - 1))) : 0.0;
  r.mean_waiting = sum_wait / static_cast<double>(n);
  r.mean_visits = static_cast<double>(sum_visits) / static_cast<double>(n);
  r.cycles_run = n;
  return r;
}

std::pair<SimReport, SimReport> compare_protocols(const ArrivalLaw& law, double A,
                                                  const CostRates& rates, std::int64_t cycles,
                                                  std::uint64_t seed, double robot_wait_rate) {
  SimConfig cfg;
  cfg.law = law;
  cfg.A = A;
  cfg.rates = rates;
  cfg.cycles = cycles;
  cfg.seed = seed;
  cfg.robot_wait_rate = robot_wait_rate;
  cfg.protocol = Protocol::RobotNeverWaits;
  SimReport never_waits = simulate(cfg);
  cfg.protocol = Protocol::FirstArrivalWaits;
  SimReport first_waits = simulate(cfg);
  // Same (seed, cycle) substreams: both reports saw identical delay draws.
  return {std::move(never_waits), std::move(first_waits)};
}

}  // namespace handover
