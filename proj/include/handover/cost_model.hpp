#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "handover/delay_dist.hpp"

namespace handover {

/// Decision variables: aimed human arrival t >= 0 and robot period A > 0.
struct ScheduleParams {
  double t = 0.0;
  double A = 1.0;
};

/// C_H: human waiting cost per time unit; C_R: cost per robot visit,
/// charged at rate C_R/A in the objective.
struct CostRates {
  double ch = 1.0;
  double cr = 1.0;
};

void validate(const ScheduleParams& params);
void validate(const CostRates& rates);

/// One realized cycle: N = max(1, ceil(T/A)) visits, waiting W = A*N - T.
struct RealizedOutcome {
  std::int64_t visits = 1;
  double waiting = 0.0;
  double cost = 0.0;
  std::int64_t unproductive_visits() const { return visits - 1; }
};

enum class EvalMethod {
  ClosedFormUniform,
  ClosedFormExponential,
  SeriesQuadrature,
  MonteCarlo,
};

std::string to_string(EvalMethod method);

struct CostBreakdown {
  double expected_waiting = 0.0;
  double expected_visits = 1.0;
  double total_cost = 0.0;
  EvalMethod method = EvalMethod::SeriesQuadrature;
  std::int64_t truncation_terms = 0;
  double est_error = 0.0;
};

/// Thrown when the expectation series fails to truncate before the horizon
/// cap quantile(1 - 1e-14) + 1000*A past the aimed time.
class NonConvergence : public std::runtime_error {
 public:
  explicit NonConvergence(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr double kDefaultTol = 1e-10;

/// total = C_H*W + (C_R/A)*N. Single combination formula shared by every
/// evaluation path so results agree bitwise.
inline double combine_cost(const CostRates& rates, double A, double waiting, double visits) {
  return rates.ch * waiting + (rates.cr / A) * visits;
}

/// Cost of one realized arrival time T. Exact-multiple convention:
/// T = k*A (as stored in doubles) lands on visit k with zero wait;
/// T <= 0 clamps to the first visit, waiting A - T.
RealizedOutcome realized_cost(double T, const ScheduleParams& params, const CostRates& rates);

/// E[W] and E[N] for the arrival law, evaluated together CDF-only:
/// E[N] = 1 + sum_{k>=1} P(T > kA), and each waiting term
/// E[(kA - T) 1{(k-1)A < T <= kA}] by parts as
/// -A*F_T((k-1)A) + integral of F_T over the interval (adaptive Simpson,
/// absolute tolerance tol*A per interval), with the k=1 interval extended
/// to (-inf, A]. The series stops once the estimated remaining tail is
/// below tol relative to the running sums.
struct SeriesEval {
  double waiting = 0.0;
  double visits = 1.0;
  double waiting_err = 0.0;
  double visits_err = 0.0;
  std::int64_t terms = 0;
};

SeriesEval evaluate_series(const ArrivalLaw& law, double A, double tol = kDefaultTol);

double expected_waiting(const ArrivalLaw& law, double A, double tol = kDefaultTol);
double expected_visits(const ArrivalLaw& law, double A, double tol = kDefaultTol);

/// Full breakdown, method = SeriesQuadrature.
CostBreakdown expected_cost(const ArrivalLaw& law, double A, const CostRates& rates,
                            double tol = kDefaultTol);

/// The classical uniform-delay closed forms: waiting (A - A*t + t^2)/2 and
/// the ceiling visit-count expression. Reference only: they agree with the
/// series evaluator at t = 0 only when 1/A is an integer (see README); the
/// series evaluator is ground truth.
CostBreakdown closed_form_uniform(const ScheduleParams& params, const CostRates& rates);

/// Exp(1)-delay closed forms: waiting A - (1+t) + A*e^t/(e^A - 1),
/// visits 1 + e^t/(e^A - 1).
CostBreakdown closed_form_exponential(const ScheduleParams& params, const CostRates& rates);

}  // namespace handover
