#include "handover/delay_dist.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace handover {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + " must be finite");
}

double parse_number(const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v))
    throw std::invalid_argument("bad number '" + text + "' in distribution spec");
  return v;
}

}  // namespace

DelayDistribution DelayDistribution::uniform_unit() {
  DelayDistribution d;
  d.kind_ = DelayKind::UniformUnit;
  d.a_ = 0.0;
  d.b_ = 1.0;
  d.breakpoints_ = {0.0, 1.0};
  return d;
}

DelayDistribution DelayDistribution::exponential_unit() {
  DelayDistribution d;
  d.kind_ = DelayKind::ExponentialUnit;
  d.a_ = 1.0;  // rate
  d.breakpoints_ = {0.0};
  return d;
}

DelayDistribution DelayDistribution::uniform_interval(double a, double b) {
  require_finite(a, "uniform lower end");
  require_finite(b, "uniform upper end");
  if (!(a < b)) throw std::invalid_argument("uniform interval needs a < b");
  DelayDistribution d;
  d.kind_ = DelayKind::UniformInterval;
  d.a_ = a;
  d.b_ = b;
  d.breakpoints_ = {a, b};
  return d;
}

DelayDistribution DelayDistribution::exponential_rate(double rate) {
  require_finite(rate, "exponential rate");
  if (!(rate > 0.0)) throw std::invalid_argument("exponential rate must be positive");
  DelayDistribution d;
  d.kind_ = DelayKind::ExponentialRate;
  d.a_ = rate;
  d.breakpoints_ = {0.0};
  return d;
}

DelayDistribution DelayDistribution::shifted_deterministic(double c) {
  require_finite(c, "deterministic delay");
  DelayDistribution d;
  d.kind_ = DelayKind::ShiftedDeterministic;
  d.a_ = c;
  d.breakpoints_ = {c};
  return d;
}

DelayDistribution DelayDistribution::empirical(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("empirical distribution needs >= 1 sample");
  for (double s : samples) require_finite(s, "empirical sample");
  std::sort(samples.begin(), samples.end());
  DelayDistribution d;
  d.kind_ = DelayKind::Empirical;
  d.breakpoints_ = samples;
  d.samples_ = std::move(samples);
  return d;
}

double DelayDistribution::cdf(double y) const {
  switch (kind_) {
    case DelayKind::UniformUnit:
      return y <= 0.0 ? 0.0 : (y >= 1.0 ? 1.0 : y);
    case DelayKind::UniformInterval: {
      if (y <= a_) return 0.0;
      if (y >= b_) return 1.0;
      return (y - a_) / (b_ - a_);
    }
    case DelayKind::ExponentialUnit:
    case DelayKind::ExponentialRate:
      return y <= 0.0 ? 0.0 : -std::expm1(-a_ * y);
    case DelayKind::ShiftedDeterministic:
      return y >= a_ ? 1.0 : 0.0;
    case DelayKind::Empirical: {
      auto it = std::upper_bound(samples_.begin(), samples_.end(), y);
      return static_cast<double>(it - samples_.begin()) / static_cast<double>(samples_.size());
    }
  }
  return 0.0;
}

double DelayDistribution::survival(double y) const {
  switch (kind_) {
    case DelayKind::UniformUnit:
      return y <= 0.0 ? 1.0 : (y >= 1.0 ? 0.0 : 1.0 - y);
    case DelayKind::UniformInterval: {
      if (y <= a_) return 1.0;
      if (y >= b_) return 0.0;
      return (b_ - y) / (b_ - a_);
    }
    case DelayKind::ExponentialUnit:
    case DelayKind::ExponentialRate:
      return y <= 0.0 ? 1.0 : std::exp(-a_ * y);
    case DelayKind::ShiftedDeterministic:
      return y >= a_ ? 0.0 : 1.0;
    case DelayKind::Empirical: {
      auto it = std::upper_bound(samples_.begin(), samples_.end(), y);
      return static_cast<double>(samples_.end() - it) / static_cast<double>(samples_.size());
    }
  }
  return 0.0;
}

double DelayDistribution::quantile(double p) const {
  const bool closed_top = kind_ == DelayKind::Empirical;
  if (!(p >= 0.0) || p > 1.0 || (p == 1.0 && !closed_top))
    throw std::domain_error("quantile probability out of range");
  switch (kind_) {
    case DelayKind::UniformUnit:
      return p;
    case DelayKind::UniformInterval:
      return a_ + p * (b_ - a_);
    case DelayKind::ExponentialUnit:
    case DelayKind::ExponentialRate:
      return -std::log1p(-p) / a_;
    case DelayKind::ShiftedDeterministic:
      return a_;
    case DelayKind::Empirical: {
      if (p == 0.0) return samples_.front();
      const double n = static_cast<double>(samples_.size());
      auto idx = static_cast<std::size_t>(std::ceil(p * n)) - 1;
      if (idx >= samples_.size()) idx = samples_.size() - 1;
      return samples_[idx];
    }
  }
  return 0.0;
}

double DelayDistribution::mean() const {
  switch (kind_) {
    case DelayKind::UniformUnit:
      return 0.5;
    case DelayKind::UniformInterval:
      return 0.5 * (a_ + b_);
    case DelayKind::ExponentialUnit:
    case DelayKind::ExponentialRate:
      return 1.0 / a_;
    case DelayKind::ShiftedDeterministic:
      return a_;
    case DelayKind::Empirical:
      return std::accumulate(samples_.begin(), samples_.end(), 0.0) /
             static_cast<double>(samples_.size());
  }
  return 0.0;
}

double DelayDistribution::support_lo() const {
  switch (kind_) {
    case DelayKind::UniformUnit:
      return 0.0;
    case DelayKind::UniformInterval:
      return a_;
    case DelayKind::ExponentialUnit:
    case DelayKind::ExponentialRate:
      return 0.0;
    case DelayKind::ShiftedDeterministic:
      return a_;
    case DelayKind::Empirical:
      return samples_.front();
  }
  return 0.0;
}

double DelayDistribution::support_hi() const {
  switch (kind_) {
    case DelayKind::UniformUnit:
      return 1.0;
    case DelayKind::UniformInterval:
      return b_;
    case DelayKind::ExponentialUnit:
    case DelayKind::ExponentialRate:
      return kInf;
    case DelayKind::ShiftedDeterministic:
      return a_;
    case DelayKind::Empirical:
      return samples_.back();
  }
  return kInf;
}

std::string DelayDistribution::spec_string() const {
  std::ostringstream out;
  out.precision(17);
  switch (kind_) {
    case DelayKind::UniformUnit:
      return "uniform";
    case DelayKind::ExponentialUnit:
      return "exp";
    case DelayKind::UniformInterval:
      out << "uniform:" << a_ << "," << b_;
      return out.str();
    case DelayKind::ExponentialRate:
      out << "exp:" << a_;
      return out.str();
    case DelayKind::ShiftedDeterministic:
      out << "det:" << a_;
      return out.str();
    case DelayKind::Empirical:
      out << "empirical[" << samples_.size() << " samples]";
      return out.str();
  }
  return {};
}

namespace {

std::vector<double> load_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sample file '" + path + "'");
  std::vector<double> samples;
  std::string line;
  while (std::getline(in, line)) {
    // strip whitespace; skip blanks
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    samples.push_back(parse_number(line.substr(first, last - first + 1)));
  }
  if (samples.empty()) throw std::invalid_argument("sample file '" + path + "' has no values");
  return samples;
}

}  // namespace

DelayDistribution parse_dist_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);

  if (head == "uniform") {
    if (args.empty()) return DelayDistribution::uniform_unit();
    const auto comma = args.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("uniform spec needs two endpoints: uniform:a,b");
    return DelayDistribution::uniform_interval(parse_number(args.substr(0, comma)),
                                               parse_number(args.substr(comma + 1)));
  }
  if (head == "exp") {
    if (args.empty()) return DelayDistribution::exponential_unit();
    return DelayDistribution::exponential_rate(parse_number(args));
  }
  if (head == "det") {
    if (args.empty()) throw std::invalid_argument("det spec needs a value: det:c");
    return DelayDistribution::shifted_deterministic(parse_number(args));
  }
  if (head == "empirical") {
    if (args.empty()) throw std::invalid_argument("empirical spec needs a path: empirical:<path>");
    return DelayDistribution::empirical(load_samples(args));
  }
  throw std::invalid_argument("unknown distribution '" + spec + "'");
}

}  // namespace handover
