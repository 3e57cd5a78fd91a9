#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include <doctest.h>

#include "handover/delay_dist.hpp"

using namespace handover;

namespace {

std::vector<DelayDistribution> all_kinds() {
  return {
      DelayDistribution::uniform_unit(),
      DelayDistribution::exponential_unit(),
      DelayDistribution::uniform_interval(-0.2, 0.8),
      DelayDistribution::exponential_rate(2.5),
      DelayDistribution::shifted_deterministic(0.3),
      DelayDistribution::empirical({0.05, 0.2, 0.2, 0.7, 1.4}),
  };
}

// Kolmogorov-Smirnov distance sup_y |ECDF(y) - F(y)|. Both functions are
// right-continuous steps (or smooth), so the sup is attained at a draw value
// or approached from its left; the left limit of F is probed a hair below,
// which also keeps atoms (point masses, empirical laws) exact.
double ks_distance(std::vector<double> draws, const DelayDistribution& d) {
  std::sort(draws.begin(), draws.end());
  const double n = static_cast<double>(draws.size());
  double ks = 0.0;
  std::size_t i = 0;
  while (i < draws.size()) {
    const double x = draws[i];
    std::size_t j = i;
    while (j < draws.size() && draws[j] == x) ++j;
    const double ecdf_at = static_cast<double>(j) / n;
    const double ecdf_before = static_cast<double>(i) / n;
    ks = std::max(ks, std::abs(ecdf_at - d.cdf(x)));
    ks = std::max(ks, std::abs(ecdf_before - d.cdf(x - 1e-9 * std::max(1.0, std::abs(x)))));
    i = j;
  }
  return ks;
}

}  // namespace

TEST_CASE("cdf matches the case-study laws") {
  CHECK(DelayDistribution::uniform_unit().cdf(0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(DelayDistribution::exponential_unit().cdf(0.0) == 0.0);
  CHECK(DelayDistribution::exponential_unit().cdf(std::log(2.0)) ==
        doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("survival keeps tail accuracy") {
  // exp(-50), frozen from high-precision evaluation
  CHECK(DelayDistribution::exponential_unit().survival(50.0) ==
        doctest::Approx(1.9287498479639178e-22).epsilon(1e-12));
  CHECK(DelayDistribution::uniform_unit().survival(2.0) == 0.0);
  CHECK(DelayDistribution::uniform_unit().survival(0.0) == 1.0);
  // rate scaling
  CHECK(DelayDistribution::exponential_rate(2.0).survival(25.0) ==
        doctest::Approx(1.9287498479639178e-22).epsilon(1e-12));
}

TEST_CASE("quantile basics and domain checks") {
  CHECK(DelayDistribution::uniform_unit().quantile(0.25) == 0.25);
  CHECK(DelayDistribution::exponential_unit().quantile(0.5) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(DelayDistribution::shifted_deterministic(0.3).quantile(0.9) == 0.3);

  CHECK_THROWS_AS(DelayDistribution::uniform_unit().quantile(-0.1), std::domain_error);
  CHECK_THROWS_AS(DelayDistribution::uniform_unit().quantile(1.0), std::domain_error);
  CHECK_THROWS_AS(DelayDistribution::exponential_unit().quantile(1.5), std::domain_error);
  // Empirical admits the closed top
  CHECK(DelayDistribution::empirical({0.1, 0.3}).quantile(1.0) == 0.3);
}

TEST_CASE("means") {
  CHECK(DelayDistribution::uniform_unit().mean() == 0.5);
  CHECK(DelayDistribution::exponential_unit().mean() == 1.0);
  CHECK(DelayDistribution::empirical({0.1, 0.3}).mean() == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(DelayDistribution::uniform_interval(-0.2, 0.8).mean() ==
        doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("sampling: point mass and law of large numbers") {
  Rng rng(99);
  const auto det = DelayDistribution::shifted_deterministic(0.3);
  for (int i = 0; i < 10; ++i) CHECK(det.sample(rng) == 0.3);

  constexpr int n = 1'000'000;
  {
    const auto u = DelayDistribution::uniform_unit();
    Rng r(2024);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += u.sample(r);
    const double tol = 3.0 * (1.0 / std::sqrt(12.0)) / 1e3;  // 3 sigma of the mean
    CHECK(std::abs(sum / n - 0.5) < tol);
  }
  {
    const auto e = DelayDistribution::exponential_unit();
    Rng r(2025);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += e.sample(r);
    CHECK(std::abs(sum / n - 1.0) < 3e-3);
  }
}

TEST_CASE("cdf is monotone for every kind") {
  for (const auto& d : all_kinds()) {
    Rng rng(7);
    const double lo = d.support_lo() - 1.0;
    const double span = (std::isfinite(d.support_hi()) ? d.support_hi() : 40.0) + 2.0 - lo;
    for (int i = 0; i < 10'000; ++i) {
      double y1 = lo + span * rng.next_unit();
      double y2 = lo + span * rng.next_unit();
      if (y1 > y2) std::swap(y1, y2);
      CHECK(d.cdf(y1) <= d.cdf(y2));
    }
  }
}

TEST_CASE("quantile/cdf round trip on a probability grid") {
  const std::vector<DelayDistribution> parametric = {
      DelayDistribution::uniform_unit(),
      DelayDistribution::exponential_unit(),
      DelayDistribution::uniform_interval(-0.2, 0.8),
      DelayDistribution::exponential_rate(2.5),
  };
  for (const auto& d : parametric) {
    for (int i = 1; i < 1000; ++i) {
      const double p = static_cast<double>(i) / 1000.0;
      const double q = d.quantile(p);
      CHECK(d.cdf(q) >= p - 1e-14);
      const double eps = 1e-12 * std::max(1.0, std::abs(q));
      CHECK(d.cdf(q - eps) < p);
    }
  }
  // step laws: F(quantile(p)) >= p still holds
  for (const auto& d : {DelayDistribution::shifted_deterministic(0.3),
                        DelayDistribution::empirical({0.05, 0.2, 0.2, 0.7, 1.4})}) {
    for (int i = 1; i < 1000; ++i) {
      const double p = static_cast<double>(i) / 1000.0;
      CHECK(d.cdf(d.quantile(p)) >= p);
    }
  }
}

TEST_CASE("survival complements cdf in the bulk and keeps digits in the tail") {
  for (const auto& d : all_kinds()) {
    Rng rng(11);
    const double lo = d.support_lo() - 0.5;
    const double hi = std::isfinite(d.support_hi()) ? d.support_hi() + 0.5 : 10.0;
    for (int i = 0; i < 2000; ++i) {
      const double y = lo + (hi - lo) * rng.next_unit();
      CHECK(std::abs(d.survival(y) + d.cdf(y) - 1.0) <= 1e-15);
    }
  }
  // where the cdf rounds to 1 the survival still carries >= 10 digits
  const auto e = DelayDistribution::exponential_unit();
  for (double y : {40.0, 60.0, 200.0}) {
    CHECK(e.cdf(y) == 1.0);
    CHECK(e.survival(y) == doctest::Approx(std::exp(-y)).epsilon(1e-10));
    CHECK(e.survival(y) > 0.0);
  }
}

TEST_CASE("inverse-transform draws match the analytic cdf (KS)") {
  constexpr int n = 100'000;
  int stream = 0;
  for (const auto& d : all_kinds()) {
    Rng rng(5000 + 17 * stream++);
    std::vector<double> draws(n);
    for (auto& x : draws) x = d.sample(rng);
    CHECK(ks_distance(std::move(draws), d) < 0.01);
  }
}

TEST_CASE("arrival law shifts the delay law exactly") {
  const ArrivalLaw law{DelayDistribution::exponential_unit(), 0.7};
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const double x = -1.0 + 6.0 * rng.next_unit();
    CHECK(law.cdf(x) == law.delay.cdf(x - 0.7));
    CHECK(law.survival(x) == law.delay.survival(x - 0.7));
  }
  CHECK(law.mean() == doctest::Approx(1.7).epsilon(1e-15));
  CHECK(law.support_lo() == 0.7);
}

TEST_CASE("distribution spec parsing") {
  CHECK(parse_dist_spec("uniform").kind() == DelayKind::UniformUnit);
  CHECK(parse_dist_spec("exp").kind() == DelayKind::ExponentialUnit);
  CHECK(parse_dist_spec("uniform:-0.2,0.8").kind() == DelayKind::UniformInterval);
  CHECK(parse_dist_spec("exp:2.5").kind() == DelayKind::ExponentialRate);
  CHECK(parse_dist_spec("det:0.3").kind() == DelayKind::ShiftedDeterministic);
  CHECK(parse_dist_spec("exp:2.5").mean() == doctest::Approx(0.4).epsilon(1e-15));

  CHECK_THROWS_AS(parse_dist_spec("gauss"), std::invalid_argument);
  CHECK_THROWS_AS(parse_dist_spec("uniform:1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_dist_spec("uniform:2,1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_dist_spec("exp:0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_dist_spec("exp:x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_dist_spec("det:"), std::invalid_argument);

  const auto path = std::filesystem::temp_directory_path() / "handover_samples.txt";
  {
    std::ofstream f(path);
    f << "0.4\n\n 0.1 \n0.7\n";
  }
  const auto emp = parse_dist_spec("empirical:" + path.string());
  CHECK(emp.kind() == DelayKind::Empirical);
  CHECK(emp.mean() == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(emp.support_lo() == 0.1);
  std::filesystem::remove(path);
  CHECK_THROWS(parse_dist_spec("empirical:/no/such/file.txt"));
}

TEST_CASE("construction rejects bad parameters") {
  CHECK_THROWS_AS(DelayDistribution::uniform_interval(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(DelayDistribution::exponential_rate(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(DelayDistribution::empirical({}), std::invalid_argument);
  CHECK_THROWS_AS(DelayDistribution::empirical({0.1, std::nan("")}), std::invalid_argument);
}
