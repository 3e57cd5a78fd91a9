#include "handover/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace handover {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

struct Quad {
  double value = 0.0;
  double err = 0.0;
};

template <class F>
void simpson_rec(const F& f, double a, double fa, double b, double fb, double m, double fm,
                 double whole, double tol, int depth, Quad& out) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    out.value += left + right + delta / 15.0;  // Richardson
    out.err += std::abs(delta) / 15.0;
    return;
  }
  simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1, out);
  simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1, out);
}

template <class F>
void simpson(const F& f, double a, double fa, double b, double fb, double tol, Quad& out) {
  if (!(b > a)) return;
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, 52, out);
}

/// Integral of F_T over [lo, hi], split at the CDF's kinks and atoms so the
/// smooth pieces converge immediately and step pieces integrate exactly.
/// f_lo/f_hi carry endpoint CDF values between adjacent intervals.
Quad integrate_cdf(const ArrivalLaw& law, double lo, double hi, double abs_tol, double f_lo,
                   double* f_hi_out) {
  Quad total;
  const auto cdf = [&law](double x) { return law.cdf(x); };
  const double f_hi = cdf(hi);
  if (f_hi_out) *f_hi_out = f_hi;
  if (!(hi > lo)) return total;

  const auto& bps = law.delay.breakpoints();
  auto it = std::upper_bound(bps.begin(), bps.end(), lo - law.t);
  auto end = std::lower_bound(it, bps.end(), hi - law.t);
  const auto pieces = static_cast<double>(end - it) + 1.0;
  const double tol_piece = abs_tol / pieces;

  double cur = lo;
  double f_cur = f_lo;
  for (; it != end; ++it) {
    const double x = law.t + *it;
    if (x <= cur) continue;
    const double fx = cdf(x);
    simpson(cdf, cur, f_cur, x, fx, tol_piece, total);
    cur = x;
    f_cur = fx;
  }
  simpson(cdf, cur, f_cur, hi, f_hi, tol_piece, total);
  return total;
}

}  // namespace

void validate(const ScheduleParams& params) {
  if (!std::isfinite(params.A) || !(params.A > 0.0))
    throw std::invalid_argument("A must be positive");
  if (!std::isfinite(params.t) || params.t < 0.0)
    throw std::invalid_argument("t must be nonnegative");
}

void validate(const CostRates& rates) {
  if (!std::isfinite(rates.ch) || rates.ch < 0.0)
    throw std::invalid_argument("ch must be finite and nonnegative");
  if (!std::isfinite(rates.cr) || rates.cr < 0.0)
    throw std::invalid_argument("cr must be finite and nonnegative");
}

std::string to_string(EvalMethod method) {
  switch (method) {
    case EvalMethod::ClosedFormUniform:
      return "ClosedFormUniform";
    case EvalMethod::ClosedFormExponential:
      return "ClosedFormExponential";
    case EvalMethod::SeriesQuadrature:
      return "SeriesQuadrature";
    case EvalMethod::MonteCarlo:
      return "MonteCarlo";
  }
  return "?";
}

RealizedOutcome realized_cost(double T, const ScheduleParams& params, const CostRates& rates) {
  validate(params);
  if (!std::isfinite(T)) throw std::invalid_argument("arrival time must be finite");
  const double A = params.A;
  if (T / A > 9e15) throw std::invalid_argument("arrival is too many periods out");
  auto n = static_cast<std::int64_t>(std::ceil(T / A));
  if (n < 1) n = 1;
  // ceil on the quotient can be off by an ulp; settle on the smallest n >= 1
  // whose visit time n*A (as a double product) reaches T.
  while (n > 1 && static_cast<double>(n - 1) * A >= T) --n;
  while (static_cast<double>(n) * A < T) ++n;
  RealizedOutcome out;
  out.visits = n;
  out.waiting = static_cast<double>(n) * A - T;
  out.cost = rates.ch * out.waiting + (rates.cr / A) * static_cast<double>(n);
  return out;
}

SeriesEval evaluate_series(const ArrivalLaw& law, double A, double tol) {
  if (!std::isfinite(A) || !(A > 0.0)) throw std::invalid_argument("A must be positive");
  if (!std::isfinite(tol) || tol < 0.0) throw std::invalid_argument("tol must be nonnegative");

  const double t = law.t;
  const double lb = law.support_lo();
  const double horizon = t + law.delay.quantile(1.0 - 1e-14) + 1e3 * A;

  // Visit times k*A strictly below the support contribute survival 1 and a
  // zero waiting term; fold them in bulk and start at the first k whose
  // visit time reaches the support.
  std::int64_t k = 1;
  if (lb > A) {
    if (lb / A > 9e15) throw std::invalid_argument("support starts too many periods out");
    k = static_cast<std::int64_t>(std::ceil(lb / A));
    if (k < 1) k = 1;
    while (k > 1 && static_cast<double>(k - 1) * A >= lb) --k;
    while (static_cast<double>(k) * A < lb) ++k;
  }

  KahanSum visits;
  visits.add(1.0);  // N >= 1 always
  visits.add(static_cast<double>(k - 1));
  KahanSum waiting;
  double waiting_quad_err = 0.0;
  double tail_w = 0.0;
  double tail_n = 0.0;

  const std::int64_t k_first = k;
  double f_prev = 0.0;   // F_T((k-1)A); zero below the support
  double s_prev = -1.0;  // previous survival; <0 marks "none yet"
  for (;; ++k) {
    const double visit_time = static_cast<double>(k) * A;
    if (visit_time > horizon)
      throw NonConvergence("expectation series for " + law.delay.spec_string() +
                           " did not truncate before the horizon cap");

    // k = k_first integrates from the support's lower end (the first
    // interval is extended below (k-1)A, implementing the N >= 1 clamp);
    // later intervals start at the previous visit. An atom at the lower end
    // makes F(lb) > 0 there, so the first endpoint value is evaluated, not
    // assumed zero.
    const double lo = (k == k_first) ? std::min(lb, visit_time)
                                     : static_cast<double>(k - 1) * A;
    const double f_lo = (k == k_first) ? law.cdf(lo) : f_prev;
    double f_hi = 0.0;
    const Quad q = integrate_cdf(law, lo, visit_time, tol * A, f_lo, &f_hi);
    const double term = q.value - (k >= 2 ? A * f_prev : 0.0);
    waiting.add(term);
    waiting_quad_err += q.err;

    const double s = law.survival(visit_time);
    visits.add(s);

    // Tail estimate: survival scaled by the observed decay ratio when the
    // decay is geometric, floored at the bare survival value.
    if (s <= 0.0) {
      tail_n = 0.0;
      tail_w = 0.0;
    } else {
      const double ratio = (s_prev > 0.0) ? s / s_prev : 1.0;
      tail_n = (ratio < 1.0) ? s * std::max(1.0, ratio / (1.0 - ratio)) : kInf;
      tail_w = A * (s + tail_n);
    }
    s_prev = s;
    f_prev = f_hi;

    const double waiting_sum = std::max(waiting.sum, 0.0);
    if (tail_n <= tol * visits.sum && tail_w <= tol * waiting_sum) break;
  }

  SeriesEval out;
  out.waiting = std::max(waiting.sum, 0.0);
  out.visits = visits.sum;
  out.waiting_err = tail_w + waiting_quad_err;
  out.visits_err = tail_n;
  out.terms = k;
  return out;
}

double expected_waiting(const ArrivalLaw& law, double A, double tol) {
  return evaluate_series(law, A, tol).waiting;
}

double expected_visits(const ArrivalLaw& law, double A, double tol) {
  return evaluate_series(law, A, tol).visits;
}

CostBreakdown expected_cost(const ArrivalLaw& law, double A, const CostRates& rates, double tol) {
  validate(rates);
  const SeriesEval se = evaluate_series(law, A, tol);
  CostBreakdown out;
  out.expected_waiting = se.waiting;
  out.expected_visits = se.visits;
  out.total_cost = combine_cost(rates, A, se.waiting, se.visits);
  out.method = EvalMethod::SeriesQuadrature;
  out.truncation_terms = se.terms;
  out.est_error = rates.ch * se.waiting_err + (rates.cr / A) * se.visits_err;
  return out;
}

CostBreakdown closed_form_uniform(const ScheduleParams& params, const CostRates& rates) {
  validate(params);
  validate(rates);
  if (params.t > 1.0) throw std::invalid_argument("closed_form_uniform needs t in [0, 1]");
  const double t = params.t;
  const double A = params.A;
  const double waiting = (A - A * t + t * t) / 2.0;
  const double c = std::ceil((1.0 + t) / A);
  const double visits = c * ((1.0 + t) - 0.5 * (c - 1.0)) - t;
  CostBreakdown out;
  out.expected_waiting = waiting;
  out.expected_visits = visits;
  out.total_cost = combine_cost(rates, A, waiting, visits);
  out.method = EvalMethod::ClosedFormUniform;
  return out;
}

CostBreakdown closed_form_exponential(const ScheduleParams& params, const CostRates& rates) {
  validate(params);
  validate(rates);
  const double t = params.t;
  const double A = params.A;
  const double em = std::expm1(A);  // e^A - 1
  const double phase = std::exp(t) / em;
  const double waiting = A - (1.0 + t) + A * phase;
  const double visits = 1.0 + phase;
  CostBreakdown out;
  out.expected_waiting = waiting;
  out.expected_visits = visits;
  out.total_cost = combine_cost(rates, A, waiting, visits);
  out.method = EvalMethod::ClosedFormExponential;
  return out;
}

}  // namespace handover
