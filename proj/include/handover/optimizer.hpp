#pragma once

#include <cstdint>
#include <vector>

#include "handover/cost_model.hpp"
#include "handover/delay_dist.hpp"

namespace handover {

/// Box bounds and grid resolution for the (t, A) search.
struct SearchDomain {
  double t_lo = 0.0;
  double t_hi = 1.0;
  double A_lo = 1e-3;
  double A_hi = 3.0;
  int n_t = 400;
  int n_A = 400;
  double refine_tol = 1e-6;
};

void validate(const SearchDomain& domain);

/// t in [0, q_Y(0.999)], A in [1e-3, t_hi + q_Y(0.999) + 1], 400x400 grid.
SearchDomain default_domain(const DelayDistribution& delay);

/// Grid node coordinate; endpoints are exact.
double grid_node(double lo, double hi, int i, int n);

/// The minimized objective. On top of the expected cycle cost it charges the
/// scheduled start t at the human rate, so postponing dispatch toward a robot
/// visit is never free:
///   obj = C_H*(E[W] + t) + (C_R/A)*E[N] = C_H*(A*E[N] - E[Y]) + (C_R/A)*E[N]
/// (equal forms by the pathwise identity W = A*N - T). This is nondecreasing
/// in t for every delay law, since only E[N] depends on t, hence t* = 0 with
/// the smaller-t tie-break. At t = 0 it equals the plain expected cost.
/// Computed in the right-hand form: where the objective is mathematically
/// flat in t it is then bitwise flat too, so ties resolve deterministically.
inline double objective_value(const CostRates& rates, double A, double visits,
                              double delay_mean) {
  return rates.ch * (A * visits - delay_mean) + (rates.cr / A) * visits;
}

/// E[W] and E[N] evaluated at every grid node.
struct GridScan {
  int n_t = 0;
  int n_A = 0;
  double delay_mean = 0.0;
  std::vector<double> t;        // size n_t
  std::vector<double> A;        // size n_A
  std::vector<double> waiting;  // row-major [i_t * n_A + i_A]
  std::vector<double> visits;
};

GridScan scan_grid(const DelayDistribution& delay, const SearchDomain& domain,
                   double tol = kDefaultTol);         // OpenMP
GridScan scan_grid_serial(const DelayDistribution& delay, const SearchDomain& domain,
                          double tol = kDefaultTol);  // reference

struct GridBest {
  int i_t = 0;
  int i_A = 0;
  double t = 0.0;
  double A = 0.0;
  double cost = 0.0;
};

/// Argmin over the scan with the (cost, A, t) lexicographic tie-break.
GridBest grid_argmin(const GridScan& scan, const CostRates& rates);

struct OptimizationResult {
  double t_star = 0.0;
  double A_star = 0.0;
  double cost_star = 0.0;
  CostBreakdown breakdown;  // plain expected cost at (t*, A*)
  std::int64_t evaluations = 0;
  GridBest grid_best;
  bool at_bound_t = false;
  bool at_bound_A = false;
};

/// Dense grid scan, then coordinate-wise golden-section refinement inside
/// the incumbent's grid cell. Brackets are never shrunk across a detected
/// jump (cost step above 10x the local secant prediction aborts the bracket
/// and keeps the best point seen). Ties break to smaller A, then smaller t.
OptimizationResult optimize(const DelayDistribution& delay, const CostRates& rates,
                            const SearchDomain& domain, double tol = kDefaultTol);

OptimizationResult optimize(const DelayDistribution& delay, const CostRates& rates,
                            double tol = kDefaultTol);  // default_domain

/// Exhaustive serial grid evaluation with the same node formula and
/// tie-break as optimize; independent oracle for the parallel scan.
GridBest brute_force_grid(const DelayDistribution& delay, const CostRates& rates,
                          const SearchDomain& domain, double tol = kDefaultTol);

/// Refinement stage alone, reusing a precomputed scan (the sweep driver
/// shares one scan across many rate pairs). Bitwise-identical to the tail
/// of optimize() for the same inputs.
OptimizationResult refine_from_grid(const DelayDistribution& delay, const CostRates& rates,
                                    const SearchDomain& domain, const GridScan& scan,
                                    const GridBest& incumbent, double tol = kDefaultTol,
                                    std::int64_t evaluations_so_far = 0);

}  // namespace handover
