#pragma once

#include <string>
#include <vector>

#include "handover/rng.hpp"

namespace handover {

enum class DelayKind {
  UniformUnit,           // Y ~ U(0,1)
  ExponentialUnit,       // Y ~ Exp(1)
  UniformInterval,       // Y ~ U(a,b)
  ExponentialRate,       // Y ~ Exp(rate)
  ShiftedDeterministic,  // Y = c
  Empirical,             // step CDF over stored samples
};

/// The law of the random human delay Y. Immutable after construction; safe
/// to share across threads. Supports may extend below zero (an early human).
class DelayDistribution {
 public:
  DelayDistribution() = default;  // UniformUnit

  static DelayDistribution uniform_unit();
  static DelayDistribution exponential_unit();
  static DelayDistribution uniform_interval(double a, double b);
  static DelayDistribution exponential_rate(double rate);
  static DelayDistribution shifted_deterministic(double c);
  static DelayDistribution empirical(std::vector<double> samples);

  DelayKind kind() const { return kind_; }

  /// F_Y(y), right-continuous, in [0,1].
  double cdf(double y) const;

  /// P(Y > y), computed directly so the tail keeps full relative accuracy
  /// (never as 1 - cdf when cdf is close to 1).
  double survival(double y) const;

  /// Smallest y with F_Y(y) >= p. Requires p in [0,1); Empirical also
  /// accepts p = 1. quantile(0) is the lower end of the support.
  double quantile(double p) const;

  /// One inverse-transform draw of Y.
  double sample(Rng& rng) const { return quantile(rng.next_unit()); }

  double mean() const;

  double support_lo() const;
  double support_hi() const;  // +inf for the exponential kinds

  /// Points where the CDF is not smooth (kinks and atoms), sorted.
  /// Quadrature splits integration ranges here.
  const std::vector<double>& breakpoints() const { return breakpoints_; }

  /// Textual form matching parse_dist_spec (Empirical renders a summary).
  std::string spec_string() const;

 private:
  DelayKind kind_ = DelayKind::UniformUnit;
  double a_ = 0.0;  // interval lo / rate / shift
  double b_ = 1.0;  // interval hi
  std::vector<double> samples_;
  std::vector<double> breakpoints_;
};

/// Arrival time T = t + Y: the delay law shifted by the aimed time t.
struct ArrivalLaw {
  DelayDistribution delay;
  double t = 0.0;

  double cdf(double x) const { return delay.cdf(x - t); }
  double survival(double x) const { return delay.survival(x - t); }
  double mean() const { return t + delay.mean(); }
  double support_lo() const { return t + delay.support_lo(); }
  double sample(Rng& rng) const { return t + delay.sample(rng); }
};

/// Parses "uniform", "exp", "uniform:a,b", "exp:rate", "det:c" or
/// "empirical:<path>" (newline-delimited decimal file of delay samples).
/// Throws std::invalid_argument on malformed specs, std::runtime_error on
/// unreadable files.
DelayDistribution parse_dist_spec(const std::string& spec);

}  // namespace handover
