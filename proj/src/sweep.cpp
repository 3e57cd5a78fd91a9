#include "handover/sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <ostream>
#include <stdexcept>

#include "handover/render.hpp"

namespace handover {

std::string g12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

double round12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

std::vector<double> default_ch_values() {
  constexpr int n = 40;
  constexpr double lo = 0.1;
  constexpr double hi = 20.0;
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i)
    v[static_cast<std::size_t>(i)] =
        lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
  v.front() = lo;
  v.back() = hi;
  return v;
}

namespace {

void validate(const SweepSpec& spec) {
  if (spec.ch_values.empty()) throw std::invalid_argument("sweep needs at least one ch value");
  double prev = 0.0;
  for (double ch : spec.ch_values) {
    if (!std::isfinite(ch) || !(ch > 0.0))
      throw std::invalid_argument("sweep ch values must be positive");
    if (!(ch > prev)) throw std::invalid_argument("sweep ch values must be strictly increasing");
    prev = ch;
  }
  if (!std::isfinite(spec.cr) || spec.cr < 0.0)
    throw std::invalid_argument("cr must be finite and nonnegative");
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  validate(spec);
  // Node expectations do not depend on the rates; one scan serves every row.
  const GridScan scan = scan_grid(spec.delay, spec.domain, spec.tol);
  const auto grid_evals = static_cast<std::int64_t>(spec.domain.n_t) * spec.domain.n_A;

  const auto n = static_cast<std::int64_t>(spec.ch_values.size());
  std::vector<SweepRow> rows(static_cast<std::size_t>(n));
  std::atomic<bool> failed{false};
  std::exception_ptr eptr = nullptr;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    if (failed.load(std::memory_order_relaxed)) continue;
    try {
      const CostRates rates{spec.ch_values[static_cast<std::size_t>(i)], spec.cr};
      const GridBest incumbent = grid_argmin(scan, rates);
      const OptimizationResult res =
          refine_from_grid(spec.delay, rates, spec.domain, scan, incumbent, spec.tol, grid_evals);
      rows[static_cast<std::size_t>(i)] =
          SweepRow{rates.ch,        rates.cr,
                   res.t_star,      res.A_star,
                   res.cost_star,   res.breakdown.expected_waiting,
                   res.breakdown.expected_visits};
    } catch (...) {
#pragma omp critical(handover_sweep_err)
      {
        if (!failed.exchange(true)) eptr = std::current_exception();
      }
    }
  }
  if (eptr) std::rethrow_exception(eptr);
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "ch,cr,t_star,a_star,cost_star,expected_waiting,expected_visits\n";
  for (const SweepRow& r : rows) {
    out << g12(r.ch) << ',' << g12(r.cr) << ',' << g12(r.t_star) << ',' << g12(r.a_star) << ','
        << g12(r.cost_star) << ',' << g12(r.expected_waiting) << ',' << g12(r.expected_visits)
        << '\n';
  }
}

}  // namespace handover
