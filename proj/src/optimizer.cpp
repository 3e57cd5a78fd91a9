#include "handover/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>

namespace handover {

namespace {

constexpr double kInvPhi = 0.6180339887498949;

struct GoldenOutcome {
  double x = 0.0;
  double f = 0.0;
};

/// Golden-section minimize over [lo, hi]; endpoints are evaluated too and
/// f-ties prefer smaller x. A cost step larger than 10x the local secant
/// prediction marks a genuine jump: the bracket is abandoned and the best
/// point seen so far is returned.
template <class F>
GoldenOutcome golden_min(const F& f, double lo, double hi, double wstop) {
  GoldenOutcome best{lo, f(lo)};
  if (!(hi > lo)) return best;
  double fa = best.f;
  double fb = f(hi);
  if (fb < best.f) best = {hi, fb};
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  auto consider = [&best](double x, double val) {
    if (val < best.f || (val == best.f && x < best.x)) best = {x, val};
  };
  consider(c, fc);
  consider(d, fd);
  while (b - a > wstop) {
    double slope = std::abs(fb - fa) / (b - a);
    if (c > a) slope = std::max(slope, std::abs(fc - fa) / (c - a));
    if (b > d) slope = std::max(slope, std::abs(fb - fd) / (b - d));
    const double pred = slope * (d - c);
    const double noise = 1e-12 * (1.0 + std::abs(fc) + std::abs(fd));
    if (std::abs(fd - fc) > 10.0 * pred + noise) break;
    if (fc <= fd) {  // ties shrink toward the low side
      b = d;
      fb = fd;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
      consider(c, fc);
    } else {
      a = c;
      fa = fc;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
      consider(d, fd);
    }
  }
  return best;
}

void fill_axis(std::vector<double>& axis, double lo, double hi, int n) {
  axis.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) axis[static_cast<std::size_t>(i)] = grid_node(lo, hi, i, n);
}

}  // namespace

void validate(const SearchDomain& domain) {
  const bool finite = std::isfinite(domain.t_lo) && std::isfinite(domain.t_hi) &&
                      std::isfinite(domain.A_lo) && std::isfinite(domain.A_hi) &&
                      std::isfinite(domain.refine_tol);
  if (!finite) throw std::invalid_argument("search domain must be finite");
  if (!(domain.t_lo >= 0.0) || !(domain.t_hi >= domain.t_lo))
    throw std::invalid_argument("need 0 <= t_lo <= t_hi");
  if (!(domain.A_lo > 0.0) || !(domain.A_hi >= domain.A_lo))
    throw std::invalid_argument("need 0 < A_lo <= A_hi");
  if (domain.n_t < 1 || domain.n_A < 1) throw std::invalid_argument("grid needs >= 1 node per axis");
  if (!(domain.refine_tol > 0.0)) throw std::invalid_argument("refine_tol must be positive");
}

SearchDomain default_domain(const DelayDistribution& delay) {
  const double q = std::max(delay.quantile(0.999), 0.0);
  SearchDomain d;
  d.t_lo = 0.0;
  d.t_hi = q;
  d.A_lo = 1e-3;
  d.A_hi = d.t_hi + q + 1.0;
  d.n_t = 400;
  d.n_A = 400;
  d.refine_tol = 1e-6;
  return d;
}

double grid_node(double lo, double hi, int i, int n) {
  if (i <= 0 || n <= 1) return lo;
  if (i >= n - 1) return hi;
  return lo + (hi - lo) * (static_cast<double>(i) / static_cast<double>(n - 1));
}

namespace {

GridScan make_scan_frame(const DelayDistribution& delay, const SearchDomain& domain) {
  GridScan g;
  g.n_t = domain.n_t;
  g.n_A = domain.n_A;
  g.delay_mean = delay.mean();
  fill_axis(g.t, domain.t_lo, domain.t_hi, domain.n_t);
  fill_axis(g.A, domain.A_lo, domain.A_hi, domain.n_A);
  g.waiting.assign(static_cast<std::size_t>(g.n_t) * g.n_A, 0.0);
  g.visits.assign(static_cast<std::size_t>(g.n_t) * g.n_A, 0.0);
  return g;
}

void scan_node(const DelayDistribution& delay, GridScan& g, double tol, std::int64_t idx) {
  const auto i = static_cast<int>(idx / g.n_A);
  const auto j = static_cast<int>(idx % g.n_A);
  const ArrivalLaw law{delay, g.t[static_cast<std::size_t>(i)]};
  const SeriesEval se = evaluate_series(law, g.A[static_cast<std::size_t>(j)], tol);
  g.waiting[static_cast<std::size_t>(idx)] = se.waiting;
  g.visits[static_cast<std::size_t>(idx)] = se.visits;
}

}  // namespace

GridScan scan_grid(const DelayDistribution& delay, const SearchDomain& domain, double tol) {
  validate(domain);
  GridScan g = make_scan_frame(delay, domain);
  const std::int64_t total = static_cast<std::int64_t>(g.n_t) * g.n_A;
  std::atomic<bool> failed{false};
  std::exception_ptr eptr = nullptr;
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t idx = 0; idx < total; ++idx) {
    if (failed.load(std::memory_order_relaxed)) continue;
    try {
      scan_node(delay, g, tol, idx);
    } catch (...) {
#pragma omp critical(handover_scan_grid_err)
      {
        if (!failed.exchange(true)) eptr = std::current_exception();
      }
    }
  }
  if (eptr) std::rethrow_exception(eptr);
  return g;
}

GridScan scan_grid_serial(const DelayDistribution& delay, const SearchDomain& domain, double tol) {
  validate(domain);
  GridScan g = make_scan_frame(delay, domain);
  const std::int64_t total = static_cast<std::int64_t>(g.n_t) * g.n_A;
  for (std::int64_t idx = 0; idx < total; ++idx) scan_node(delay, g, tol, idx);
  return g;
}

GridBest grid_argmin(const GridScan& scan, const CostRates& rates) {
  validate(rates);
  GridBest best;
  bool have = false;
  for (int i = 0; i < scan.n_t; ++i) {
    for (int j = 0; j < scan.n_A; ++j) {
      const auto idx = static_cast<std::size_t>(i) * scan.n_A + static_cast<std::size_t>(j);
      const double tv = scan.t[static_cast<std::size_t>(i)];
      const double Av = scan.A[static_cast<std::size_t>(j)];
      const double c = objective_value(rates, Av, scan.visits[idx], scan.delay_mean);
      const bool better =
          !have || c < best.cost ||
          (c == best.cost && (Av < best.A || (Av == best.A && tv < best.t)));
      if (better) {
        best = GridBest{i, j, tv, Av, c};
        have = true;
      }
    }
  }
  return best;
}

OptimizationResult refine_from_grid(const DelayDistribution& delay, const CostRates& rates,
                                    const SearchDomain& domain, const GridScan& scan,
                                    const GridBest& incumbent, double tol,
                                    std::int64_t evaluations_so_far) {
  validate(domain);
  validate(rates);
  std::int64_t evals = evaluations_so_far;

  const auto axis_at = [](const std::vector<double>& axis, int i) {
    const int n = static_cast<int>(axis.size());
    return axis[static_cast<std::size_t>(std::clamp(i, 0, n - 1))];
  };
  const double cell_t_lo = axis_at(scan.t, incumbent.i_t - 1);
  const double cell_t_hi = axis_at(scan.t, incumbent.i_t + 1);
  const double cell_A_lo = axis_at(scan.A, incumbent.i_A - 1);
  const double cell_A_hi = axis_at(scan.A, incumbent.i_A + 1);

  double best_t = incumbent.t;
  double best_A = incumbent.A;
  double best_f = incumbent.cost;
  const auto take = [&](double f, double tv, double Av) {
    if (f < best_f || (f == best_f && (Av < best_A || (Av == best_A && tv < best_t)))) {
      best_f = f;
      best_t = tv;
      best_A = Av;
    }
  };
  const auto eval_at = [&](double tv, double Av) {
    ++evals;
    const SeriesEval se = evaluate_series(ArrivalLaw{delay, tv}, Av, tol);
    return objective_value(rates, Av, se.visits, scan.delay_mean);
  };
  const auto wstop = [&](double hi) {
    return std::max(domain.refine_tol * 1e-6, 32.0 * std::numeric_limits<double>::epsilon() *
                                                  std::max(1.0, std::abs(hi)));
  };

  for (int pass = 0; pass < 8; ++pass) {
    const double before = best_f;
    const double A_now = best_A;
    const GoldenOutcome rt = golden_min([&](double tv) { return eval_at(tv, A_now); }, cell_t_lo,
                                        cell_t_hi, wstop(cell_t_hi));
    take(rt.f, rt.x, A_now);
    const double t_now = best_t;
    const GoldenOutcome ra = golden_min([&](double Av) { return eval_at(t_now, Av); }, cell_A_lo,
                                        cell_A_hi, wstop(cell_A_hi));
    take(ra.f, t_now, ra.x);
    if (!(best_f < before - 1e-15 * (1.0 + std::abs(before)))) break;
  }

  OptimizationResult out;
  out.t_star = best_t;
  out.A_star = best_A;
  out.cost_star = best_f;
  out.breakdown = expected_cost(ArrivalLaw{delay, best_t}, best_A, rates, tol);
  out.evaluations = evals;
  out.grid_best = incumbent;
  out.at_bound_t = std::min(best_t - domain.t_lo, domain.t_hi - best_t) <= domain.refine_tol;
  out.at_bound_A = std::min(best_A - domain.A_lo, domain.A_hi - best_A) <= domain.refine_tol;
  return out;
}

OptimizationResult optimize(const DelayDistribution& delay, const CostRates& rates,
                            const SearchDomain& domain, double tol) {
  const GridScan scan = scan_grid(delay, domain, tol);
  const GridBest incumbent = grid_argmin(scan, rates);
  const auto grid_evals = static_cast<std::int64_t>(domain.n_t) * domain.n_A;
  return refine_from_grid(delay, rates, domain, scan, incumbent, tol, grid_evals);
}

OptimizationResult optimize(const DelayDistribution& delay, const CostRates& rates, double tol) {
  return optimize(delay, rates, default_domain(delay), tol);
}

GridBest brute_force_grid(const DelayDistribution& delay, const CostRates& rates,
                          const SearchDomain& domain, double tol) {
  return grid_argmin(scan_grid_serial(delay, domain, tol), rates);
}

}  // namespace handover
