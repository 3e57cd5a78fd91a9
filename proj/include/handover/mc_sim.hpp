#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>

#include "handover/cost_model.hpp"
#include "handover/delay_dist.hpp"

namespace handover {

enum class Protocol {
  RobotNeverWaits,    // robot keeps its period; human waits for the next visit
  FirstArrivalWaits,  // whoever is early waits; meeting at max(T, A)
};

struct SimConfig {
  ArrivalLaw law;
  double A = 1.0;
  CostRates rates;
  Protocol protocol = Protocol::RobotNeverWaits;
  std::int64_t cycles = 0;
  std::uint64_t seed = 0;
  /// Protocol (i) only: robot waiting cost per time unit. Negative means
  /// "use C_R/A" (the per-visit cost spread over one period).
  double robot_wait_rate = -1.0;
  /// Cycles whose realized waiting exceeds this are counted as needing
  /// recalibration (diagnostic only).
  std::optional<double> recalibration_threshold;
};

struct SimReport {
  double mean_cost = 0.0;
  double se_cost = 0.0;
  double mean_waiting = 0.0;
  double mean_visits = 0.0;
  std::map<std::int64_t, std::uint64_t> hist_visits;
  std::int64_t recalibrations = 0;
  std::int64_t cycles_run = 0;
};

/// Monte Carlo over independent cycles. Cycle i draws its delay from
/// Rng::substream(seed, i), so the report is bit-identical for any worker
/// count: cycles are aggregated in fixed-size blocks (sequentially within a
/// block, blocks merged in index order with the parallel variance
/// combination), and OpenMP only distributes whole blocks.
SimReport simulate(const SimConfig& config);

/// Plain sequential per-cycle loop with streaming (Welford) accumulation;
/// reference implementation for simulate(). Integer fields match simulate()
/// exactly; floating aggregates agree to rounding.
SimReport simulate_serial(const SimConfig& config);

/// Runs both protocols on identical delay draws (substreams depend only on
/// (seed, cycle)); returns (RobotNeverWaits, FirstArrivalWaits) reports.
std::pair<SimReport, SimReport> compare_protocols(const ArrivalLaw& law, double A,
                                                  const CostRates& rates, std::int64_t cycles,
                                                  std::uint64_t seed,
                                                  double robot_wait_rate = -1.0);

}  // namespace handover
