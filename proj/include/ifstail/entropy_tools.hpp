#pragma once

// Differential entropy of Gaussian-smoothed stationary measures and the
// annulus upper bound sum_i h(p_i) + p_i log m_i.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "ifstail/error.hpp"
#include "ifstail/linalg.hpp"
#include "ifstail/parallel.hpp"
#include "ifstail/random.hpp"
#include "ifstail/stationary_sampler.hpp"
#include "ifstail/stats.hpp"

namespace ifstail {

/// h(x) = -x log x with h(0) = 0.
inline double entropy_summand(double x) {
  require(x >= 0.0, ErrorCode::InvalidArgument,
          "entropy summand of a negative number");
  return x == 0.0 ? 0.0 : -x * std::log(x);
}

/// Lebesgue volume of a radius-R ball in R^d.
inline double ball_volume(std::size_t d, double radius) {
  require(d >= 1, ErrorCode::InvalidArgument, "dimension must be positive");
  require(radius > 0.0, ErrorCode::InvalidArgument, "radius must be positive");
  const double dd = static_cast<double>(d);
  return std::exp(0.5 * dd * std::log(std::numbers::pi) -
                  std::lgamma(0.5 * dd + 1.0) + dd * std::log(radius));
}

inline constexpr int kMaxAnnulusIndex = 64;
inline constexpr double kAnnulusLeftoverTarget = 1e-4;
inline constexpr double kAnnulusLeftoverCeiling = 1e-2;

struct AnnulusReport {
  // Sum over i = -1 .. i_max, where i = -1 is the unit ball B_1 and i >= 0 is
  // the annulus B_{L^{i+1}} \ B_{L^i}.
  double bound = 0.0;
  // The same sum started at i = 0, i.e. ignoring the mass of B_1.
  double bound_from_unit = 0.0;
  double L = 0.0;
  Point center;
  int i_max = 0;
  // probs[k] and volumes[k] belong to i = k - 1.
  std::vector<double> probs;
  std::vector<double> volumes;
  // Empirical mass at distance >= L^{i_max + 1}.
  double leftover_mass = 0.0;
  bool reliable = true;
};

/// i_max = nullopt picks the smallest i >= -1 leaving less than 1e-4 of the
/// empirical mass outside, capped at 64.
inline AnnulusReport annulus_bound(const SampleSet &samples,
                                   const Point &center, double L,
                                   std::optional<int> i_max = std::nullopt) {
  require(L > 1.0, ErrorCode::InvalidArgument, "L must exceed 1");
  require(!samples.empty(), ErrorCode::EmptySampleSet,
          "sample set has no draws");
  require(static_cast<std::size_t>(center.size()) == samples.dimension(),
          ErrorCode::DimensionMismatch, "center dimension mismatch");
  require(!i_max || (*i_max >= -1 && *i_max <= kMaxAnnulusIndex),
          ErrorCode::InvalidArgument, "i_max must lie in [-1, 64]");

  // Shell index per draw: -1 inside B_1, else floor(log_L r), clamped to the
  // cap + 1 which collects everything beyond the last shell.
  const double log_l = std::log(L);
  std::vector<std::size_t> counts(kMaxAnnulusIndex + 3, 0);
  for (const auto &draw : samples.draws) {
    const double r = (draw.point - center).norm();
    int shell = -1;
    if (r >= 1.0) {
      const double raw = std::floor(std::log(r) / log_l);
      shell = raw > kMaxAnnulusIndex ? kMaxAnnulusIndex + 1
                                     : static_cast<int>(raw);
      // Guard the floor against rounding at exact powers of L.
      while (shell > 0 && r < std::pow(L, shell)) --shell;
      while (shell <= kMaxAnnulusIndex && r >= std::pow(L, shell + 1)) ++shell;
    }
    ++counts[static_cast<std::size_t>(shell + 1)];
  }

  const double total = static_cast<double>(samples.size());
  std::vector<double> beyond(counts.size() + 1, 0.0);
  for (std::size_t k = counts.size(); k-- > 0;) {
    beyond[k] = beyond[k + 1] + static_cast<double>(counts[k]) / total;
  }
  int top = i_max.value_or(kMaxAnnulusIndex);
  if (!i_max) {
    for (int i = -1; i <= kMaxAnnulusIndex; ++i) {
      if (beyond[static_cast<std::size_t>(i + 2)] < kAnnulusLeftoverTarget) {
        top = i;
        break;
      }
    }
  }

  AnnulusReport report;
  report.L = L;
  report.center = center;
  report.i_max = top;
  const std::size_t d = samples.dimension();
  CompensatedSum bound;
  CompensatedSum from_unit;
  for (int i = -1; i <= top; ++i) {
    const double p =
        static_cast<double>(counts[static_cast<std::size_t>(i + 1)]) / total;
    const double m =
        i < 0 ? ball_volume(d, 1.0)
              : ball_volume(d, std::pow(L, i + 1)) - ball_volume(d, std::pow(L, i));
    report.probs.push_back(p);
    report.volumes.push_back(m);
    const double term = entropy_summand(p) + (p > 0.0 ? p * std::log(m) : 0.0);
    bound.add(term);
    if (i >= 0) from_unit.add(term);
  }
  report.bound = bound.value();
  report.bound_from_unit = from_unit.value();
  report.leftover_mass = beyond[static_cast<std::size_t>(top + 2)];
  report.reliable = report.leftover_mass <= kAnnulusLeftoverCeiling;
  return report;
}

struct EntropyOptions {
  unsigned threads = 0;
  std::size_t min_samples = 1000;
};

/*
 * Monte Carlo estimate of H(nu * N(0, sigma^2 I)) with nu replaced by the
 * empirical measure of `samples`: evaluation point j is z + sigma xi for a
 * uniformly chosen draw z, and the estimate is the mean of -log f(y_j) where
 * f is the exact Gaussian mixture density.
 */
inline MeanEstimate smoothed_entropy(const SampleSet &samples, double sigma,
                                     std::size_t eval_count, std::uint64_t seed,
                                     const EntropyOptions &options = {}) {
  require(sigma > 0.0, ErrorCode::InvalidArgument, "sigma must be positive");
  require(eval_count >= 2, ErrorCode::InvalidArgument,
          "need at least two evaluation points");
  require(samples.size() >= options.min_samples && !samples.empty(),
          samples.empty() ? ErrorCode::EmptySampleSet
                          : ErrorCode::InvalidArgument,
          "smoothed entropy needs at least " +
              std::to_string(options.min_samples) + " draws");
  const std::size_t n = samples.size();
  const auto d = static_cast<Eigen::Index>(samples.dimension());
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  const double log_norm =
      -0.5 * static_cast<double>(d) *
          std::log(2.0 * std::numbers::pi * sigma * sigma) -
      std::log(static_cast<double>(n));

  std::vector<double> neg_log_density(eval_count);
  const std::uint64_t eval_seed = derive_seed(seed, StreamDomain::Entropy);
  parallel_for(eval_count, options.threads, [&](std::size_t j) {
    Stream stream(eval_seed, j);
    const auto pick = std::min(
        static_cast<std::size_t>(stream.uniform() * static_cast<double>(n)),
        n - 1);
    Point y = samples.draws[pick].point;
    for (Eigen::Index c = 0; c < d; ++c) y(c) += sigma * stream.normal();

    double nearest = std::numeric_limits<double>::infinity();
    for (const auto &draw : samples.draws) {
      nearest = std::min(nearest, (y - draw.point).squaredNorm());
    }
    double acc = 0.0;
    for (const auto &draw : samples.draws) {
      acc += std::exp(-((y - draw.point).squaredNorm() - nearest) * inv_two_var);
    }
    neg_log_density[j] =
        -(log_norm - nearest * inv_two_var + std::log(acc));
  });
  return mean_and_stderr(neg_log_density);
}

/// Each draw plus independent N(0, sigma^2 I) noise.
inline SampleSet smooth_samples(const SampleSet &samples, double sigma,
                                std::uint64_t seed) {
  require(sigma > 0.0, ErrorCode::InvalidArgument, "sigma must be positive");
  std::vector<Point> points;
  points.reserve(samples.size());
  const std::uint64_t noise_seed = derive_seed(seed, StreamDomain::Smoothing);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    Stream stream(noise_seed, i);
    Point p = samples.draws[i].point;
    for (Eigen::Index c = 0; c < p.size(); ++c) p(c) += sigma * stream.normal();
    points.push_back(std::move(p));
  }
  auto out = SampleSet::from_points(std::move(points), samples.measure_id);
  out.seed = seed;
  out.tolerance = samples.tolerance;
  out.start_point = samples.start_point;
  return out;
}

}  // namespace ifstail
