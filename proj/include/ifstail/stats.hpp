#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "ifstail/error.hpp"

namespace ifstail {

// Compensated (Neumaier) summation.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

inline MeanEstimate mean_and_stderr(std::span<const double> values) {
  require(!values.empty(), ErrorCode::InvalidArgument,
          "mean of an empty sequence");
  CompensatedSum total;
  for (double v : values) {
    total.add(v);
  }
  const double n = static_cast<double>(values.size());
  const double mean = total.value() / n;
  if (values.size() < 2) {
    return {mean, 0.0};
  }
  CompensatedSum squares;
  for (double v : values) {
    squares.add((v - mean) * (v - mean));
  }
  const double variance = squares.value() / (n - 1.0);
  return {mean, std::sqrt(variance / n)};
}

// log(sum(exp(terms))) with the usual max shift; -inf for an empty or all
// -inf input.
inline double log_sum_exp(std::span<const double> terms) noexcept {
  double peak = -std::numeric_limits<double>::infinity();
  for (double t : terms) {
    peak = std::max(peak, t);
  }
  if (!std::isfinite(peak)) {
    return peak;
  }
  double acc = 0.0;
  for (double t : terms) {
    acc += std::exp(t - peak);
  }
  return peak + std::log(acc);
}

struct ProportionInterval {
  double low = 0.0;
  double high = 1.0;
};

// 95% Wilson score interval for k successes out of n.
inline ProportionInterval wilson_interval(std::size_t k, std::size_t n,
                                          double z = 1.959963984540054) {
  if (n == 0) {
    return {0.0, 1.0};
  }
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
};

// Ordinary least squares of y on x with intercept.
inline LinearFit least_squares(std::span<const double> x,
                               std::span<const double> y) {
  require(x.size() == y.size(), ErrorCode::InvalidArgument,
          "least squares needs paired observations");
  require(x.size() >= 2, ErrorCode::InvalidArgument,
          "least squares needs at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0.0, ErrorCode::InvalidArgument,
          "least squares needs distinct abscissae");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    sse += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  fit.slope_stderr =
      x.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
  return fit;
}

// Two-sample Kolmogorov-Smirnov statistic sup_t |F_a(t) - F_b(t)|.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), ErrorCode::InvalidArgument,
          "KS distance needs two non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double largest = 0.0;
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == t) ++i;
    while (j < b.size() && b[j] == t) ++j;
    largest = std::max(largest, std::abs(static_cast<double>(i) / na -
                                         static_cast<double>(j) / nb));
  }
  return largest;
}

}  // namespace ifstail
