#pragma once

// Tail curves nu(B_R(x)^c), power-law exponent fits, the expanding-atom lower
// bound exponent, empirical large deviations of log-Lipschitz sums, and the
// finite-n convergence diagnostic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "ifstail/error.hpp"
#include "ifstail/generating_measure.hpp"
#include "ifstail/linalg.hpp"
#include "ifstail/metric_maps.hpp"
#include "ifstail/parallel.hpp"
#include "ifstail/random.hpp"
#include "ifstail/stationary_sampler.hpp"
#include "ifstail/stats.hpp"

namespace ifstail {

inline constexpr std::size_t kDefaultMinExceed = 30;

struct TailCurve {
  Point center;
  std::vector<double> radii;
  std::vector<std::size_t> exceed_counts;
  std::size_t total = 0;
  std::vector<double> ci_low;
  std::vector<double> ci_high;

  double p_hat(std::size_t j) const {
    return static_cast<double>(exceed_counts.at(j)) /
           static_cast<double>(total);
  }
};

struct TailFit {
  double alpha_hat = 0.0;
  // max of ols_std_error and the slope's standard error under the binomial
  // covariance of the nested exceedance counts.
  double std_error = 0.0;
  // Classical residual-based OLS standard error.
  double ols_std_error = 0.0;
  double r_squared = 0.0;
  std::vector<double> radii_used;
};

inline std::vector<double> sorted_distances(const SampleSet &samples,
                                            const Point &center) {
  require(!samples.empty(), ErrorCode::EmptySampleSet,
          "sample set has no draws");
  require(static_cast<std::size_t>(center.size()) == samples.dimension(),
          ErrorCode::DimensionMismatch, "center dimension mismatch");
  std::vector<double> d;
  d.reserve(samples.size());
  for (const auto &draw : samples.draws) {
    d.push_back((draw.point - center).norm());
  }
  std::sort(d.begin(), d.end());
  return d;
}

inline TailCurve empirical_tail(const SampleSet &samples, const Point &center,
                                std::span<const double> radii) {
  const auto d = sorted_distances(samples, center);
  for (std::size_t j = 0; j < radii.size(); ++j) {
    require(radii[j] > 0.0 && (j == 0 || radii[j] > radii[j - 1]),
            ErrorCode::InvalidArgument,
            "radii must be positive and strictly increasing");
  }
  TailCurve curve;
  curve.center = center;
  curve.radii.assign(radii.begin(), radii.end());
  curve.total = d.size();
  for (double r : radii) {
    const auto first = std::lower_bound(d.begin(), d.end(), r);
    const auto k = static_cast<std::size_t>(d.end() - first);
    curve.exceed_counts.push_back(k);
    const auto ci = wilson_interval(k, curve.total);
    curve.ci_low.push_back(ci.low);
    curve.ci_high.push_back(ci.high);
  }
  return curve;
}

/*
 * Geometric grid R_j = R_0 2^{j/2}, with R_0 the median distance from the
 * center (the smallest positive distance if the median is zero), extended
 * while some draw still lies beyond R_j.
 */
inline std::vector<double> auto_radii(const SampleSet &samples,
                                      const Point &center,
                                      std::size_t max_radii = 256) {
  const auto d = sorted_distances(samples, center);
  double r0 = d[(d.size() - 1) / 2];
  if (r0 <= 0.0) {
    const auto positive = std::upper_bound(d.begin(), d.end(), 0.0);
    require(positive != d.end(), ErrorCode::InsufficientTailData,
            "every draw sits exactly at the center");
    r0 = *positive;
  }
  std::vector<double> radii;
  for (std::size_t j = 0; j < max_radii; ++j) {
    const double r = r0 * std::exp2(0.5 * static_cast<double>(j));
    if (r > d.back()) {
      break;
    }
    radii.push_back(r);
  }
  if (radii.empty()) {
    radii.push_back(r0);
  }
  return radii;
}

/*
 * OLS of log p_hat on log R over radii with at least `min_exceed` draws
 * beyond them; alpha_hat is minus the slope.
 *
 * The counts are nested, so the residuals are strongly correlated and the
 * residual-based standard error understates the spread of alpha_hat several
 * times over. For R_k <= R_l, Cov(log p_hat_k, log p_hat_l) ~ (1 - p_k) /
 * (N p_k), and the slope's variance is w' C w with the OLS weights w.
 */
inline TailFit fit_tail_exponent(const TailCurve &curve,
                                 std::size_t min_exceed = kDefaultMinExceed) {
  std::vector<double> log_r;
  std::vector<double> log_p;
  std::vector<double> p;
  TailFit fit;
  for (std::size_t j = 0; j < curve.radii.size(); ++j) {
    const std::size_t k = curve.exceed_counts[j];
    if (k == 0 || k < min_exceed) {
      continue;
    }
    log_r.push_back(std::log(curve.radii[j]));
    log_p.push_back(std::log(curve.p_hat(j)));
    p.push_back(curve.p_hat(j));
    fit.radii_used.push_back(curve.radii[j]);
  }
  require(log_r.size() >= 3, ErrorCode::InsufficientTailData,
          "only " + std::to_string(log_r.size()) +
              " radii have at least " + std::to_string(min_exceed) +
              " exceedances; need 3");
  const auto ols = least_squares(log_r, log_p);
  fit.alpha_hat = -ols.slope;
  fit.ols_std_error = ols.slope_stderr;
  fit.r_squared = ols.r_squared;

  const std::size_t m = log_r.size();
  double mean = 0.0;
  for (double x : log_r) mean += x;
  mean /= static_cast<double>(m);
  double sxx = 0.0;
  for (double x : log_r) sxx += (x - mean) * (x - mean);
  const double total = static_cast<double>(curve.total);
  double var = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t l = 0; l < m; ++l) {
      const double pk = p[std::min(k, l)];
      var += (log_r[k] - mean) * (log_r[l] - mean) * (1.0 - pk) / (total * pk);
    }
  }
  fit.std_error = std::max(fit.ols_std_error, std::sqrt(std::max(var, 0.0)) / sxx);
  return fit;
}

struct LowerBoundExponent {
  double alpha_1 = 0.0;
  std::size_t atom_index = 0;
  Point fixed_point;
};

/*
 * min over atoms g with rho(g) > 1 of -log p_g / log rho(g), together with the
 * minimizing atom and its fixed point. For similarities the stationary
 * measure then satisfies nu(B_R(x_0)^c) >> R^{-alpha_1}.
 */
inline LowerBoundExponent lower_bound_exponent(const GeneratingMeasure &mu) {
  require(!mu.is_countable(), ErrorCode::InvalidArgument,
          "lower bound exponent needs a finitely supported measure");
  std::optional<LowerBoundExponent> best;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double rho = mu.lipschitz(i);
    if (rho <= 1.0 || !is_affine(mu.atoms()[i].map)) {
      continue;
    }
    const double alpha = -std::log(mu.weight(i)) / std::log(rho);
    if (!best || alpha < best->alpha_1) {
      best = LowerBoundExponent{alpha, i, Point()};
    }
  }
  require(best.has_value(), ErrorCode::NoExpandingAtom,
          "no affine atom has Lipschitz constant > 1");
  best->fixed_point = fixed_point(mu.atoms()[best->atom_index].map);
  return *best;
}

/// Natural tail center: the expanding atom's fixed point when one exists,
/// else the sample mean.
inline Point default_tail_center(const GeneratingMeasure &mu,
                                 const SampleSet &samples) {
  if (!mu.is_countable()) {
    try {
      return lower_bound_exponent(mu).fixed_point;
    } catch (const Error &) {
    }
  }
  require(!samples.empty(), ErrorCode::EmptySampleSet,
          "sample set has no draws");
  Point mean = Point::Zero(static_cast<Eigen::Index>(samples.dimension()));
  for (const auto &d : samples.draws) mean += d.point;
  return mean / static_cast<double>(samples.size());
}

// ---------------------------------------------------------------------------
// Large deviations

enum class LdpVariant {
  // |n chi - sum log rho(g_i)| > eps n
  Factorwise,
  // |n lambda - log rho(g_1 ... g_n)| > eps n
  Product,
};

struct LdpCurve {
  double epsilon = 0.0;
  std::vector<std::size_t> n_grid;
  std::size_t trials = 0;
  std::vector<std::size_t> deviations;
  std::vector<double> freqs;
  LdpVariant variant = LdpVariant::Factorwise;
  // chi (exact) for Factorwise; the Lyapunov estimate at the largest n for
  // Product, which is itself Monte Carlo and reported with its error.
  double reference = 0.0;
  double reference_stderr = 0.0;
  bool reference_estimated = false;
};

struct LdpOptions {
  unsigned threads = 0;
  double work_budget = 2e9;
  // Trials for the Product variant's Lyapunov reference; 0 = same as trials.
  std::size_t reference_trials = 0;
};

inline LdpCurve ldp_empirical(const GeneratingMeasure &mu, double epsilon,
                              std::span<const std::size_t> n_grid,
                              std::size_t trials, std::uint64_t seed,
                              LdpVariant variant,
                              const LdpOptions &options = {}) {
  require(!mu.is_countable(), ErrorCode::InvalidArgument,
          "large deviation estimates need a finitely supported measure");
  require(epsilon > 0.0, ErrorCode::InvalidArgument, "epsilon must be positive");
  require(trials >= 1000, ErrorCode::InvalidArgument,
          "at least 1000 trials are required");
  require(!n_grid.empty(), ErrorCode::InvalidArgument, "empty n grid");
  double work = 0.0;
  for (std::size_t j = 0; j < n_grid.size(); ++j) {
    require(n_grid[j] >= 1 && (j == 0 || n_grid[j] > n_grid[j - 1]),
            ErrorCode::InvalidArgument,
            "n grid must be positive and strictly increasing");
    work += static_cast<double>(n_grid[j]) * static_cast<double>(trials);
  }
  require(work <= options.work_budget, ErrorCode::WorkBudgetExceeded,
          "ldp trials exceed the configured work budget");

  LdpCurve curve;
  curve.epsilon = epsilon;
  curve.n_grid.assign(n_grid.begin(), n_grid.end());
  curve.trials = trials;
  curve.variant = variant;
  if (variant == LdpVariant::Factorwise) {
    curve.reference = contraction_rate(mu);
  } else {
    const std::size_t ref_trials =
        options.reference_trials == 0 ? trials : options.reference_trials;
    const auto lambda = lyapunov_estimate(
        mu, n_grid.back(), ref_trials,
        derive_seed(seed, StreamDomain::LdpReference),
        {options.threads, std::numeric_limits<double>::infinity()});
    curve.reference = lambda.mean;
    curve.reference_stderr = lambda.std_error;
    curve.reference_estimated = true;
  }

  std::vector<double> log_rho(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    require(mu.lipschitz(i) > 0.0, ErrorCode::ZeroLipschitz,
            "atom with Lipschitz constant 0");
    log_rho[i] = std::log(mu.lipschitz(i));
  }
  const auto dim = static_cast<Eigen::Index>(mu.dimension());

  for (std::size_t j = 0; j < n_grid.size(); ++j) {
    const std::size_t n = n_grid[j];
    const double nn = static_cast<double>(n);
    const std::uint64_t row_seed = derive_seed(seed, StreamDomain::Ldp, j);
    std::vector<unsigned char> deviated(trials, 0);
    parallel_for(trials, options.threads, [&](std::size_t trial) {
      Stream stream(row_seed, trial);
      double log_word = 0.0;
      if (variant == LdpVariant::Factorwise) {
        for (std::size_t k = 0; k < n; ++k) {
          log_word += log_rho[mu.pick(stream)];
        }
      } else if (mu.all_affine()) {
        ScaledProduct product(dim);
        for (std::size_t k = 0; k < n; ++k) {
          product.right_multiply(linear_part(mu.atoms()[mu.pick(stream)].map));
        }
        log_word = product.log_norm();
      } else {
        LipschitzMap word = mu.atoms()[mu.pick(stream)].map;
        for (std::size_t k = 1; k < n; ++k) {
          word = compose(word, mu.atoms()[mu.pick(stream)].map);
        }
        log_word = std::log(lipschitz_constant(word));
      }
      deviated[trial] =
          std::abs(nn * curve.reference - log_word) > epsilon * nn ? 1 : 0;
    });
    std::size_t count = 0;
    for (auto flag : deviated) count += flag;
    curve.deviations.push_back(count);
    curve.freqs.push_back(static_cast<double>(count) /
                          static_cast<double>(trials));
  }
  return curve;
}

struct RateFit {
  // +inf when every frequency is zero.
  double delta_hat = 0.0;
  double std_error = 0.0;
  bool infinite() const noexcept { return std::isinf(delta_hat); }
};

/// OLS slope of -log(freq) against n over the grid points with nonzero
/// frequency.
inline RateFit ldp_rate_fit(const LdpCurve &curve) {
  std::vector<double> n;
  std::vector<double> y;
  for (std::size_t j = 0; j < curve.freqs.size(); ++j) {
    if (curve.freqs[j] > 0.0) {
      n.push_back(static_cast<double>(curve.n_grid[j]));
      y.push_back(-std::log(curve.freqs[j]));
    }
  }
  if (n.empty()) {
    return {std::numeric_limits<double>::infinity(), 0.0};
  }
  require(n.size() >= 3, ErrorCode::InsufficientLdpData,
          "need at least 3 grid points with nonzero deviation frequency");
  const auto ols = least_squares(n, y);
  return {ols.slope, ols.slope_stderr};
}

// ---------------------------------------------------------------------------
// Convergence of mu^{*n} * delta_x toward nu

/// 0 within distance R/2 of x, 1 at distance >= R, linear in between.
inline double bump_value(double radius, const Point &x, const Point &y) {
  require(radius > 0.0, ErrorCode::InvalidArgument, "radius must be positive");
  require(x.size() == y.size(), ErrorCode::DimensionMismatch,
          "bump arguments differ in dimension");
  const double d = (y - x).norm();
  if (d <= 0.5 * radius) return 0.0;
  if (d >= radius) return 1.0;
  return (d - 0.5 * radius) / (0.5 * radius);
}

struct DiagnosticOptions {
  // Bump center; defaults to the start point.
  std::optional<Point> center;
  // Reference sample size; 0 = 10 * trials.
  std::size_t reference_size = 0;
  double reference_tol = 1e-8;
  unsigned threads = 0;
};

struct GapPoint {
  std::size_t n = 0;
  double gap = 0.0;
  // Monte Carlo standard error of the gap.
  double noise = 0.0;
  bool above_noise = false;
};

struct ConvergenceReport {
  std::vector<GapPoint> points;
  double reference_mean = 0.0;
  // Fewer than three gaps exceed twice their noise floor.
  bool below_noise = true;
  // Fitted exponential decay rate of the gaps above noise; NaN when
  // below_noise.
  double theta_hat = std::numeric_limits<double>::quiet_NaN();
};

inline ConvergenceReport convergence_diagnostic(
    const GeneratingMeasure &mu, const Point &x, double radius,
    std::span<const std::size_t> n_grid, std::size_t trials,
    std::uint64_t seed, const DiagnosticOptions &options = {}) {
  require(radius > 0.0, ErrorCode::InvalidArgument, "radius must be positive");
  require(trials >= 1, ErrorCode::InvalidArgument, "trials must be positive");
  const std::size_t ref_size =
      options.reference_size == 0 ? 10 * trials : options.reference_size;
  require(ref_size >= 10 * trials, ErrorCode::InvalidArgument,
          "reference sample must hold at least 10 * trials draws");
  const Point center = options.center.value_or(x);
  const GeneratingMeasure finite = mu.renormalized();

  const SampleSet reference = sample_batch(
      finite, x, options.reference_tol, ref_size, 0,
      derive_seed(seed, StreamDomain::DiagnosticReference),
      {options.threads, 1.0});
  std::vector<double> ref_values(reference.size());
  for (std::size_t i = 0; i < reference.size(); ++i) {
    ref_values[i] = bump_value(radius, center, reference.draws[i].point);
  }
  const auto ref = mean_and_stderr(ref_values);

  ConvergenceReport report;
  report.reference_mean = ref.mean;
  std::vector<double> fit_n;
  std::vector<double> fit_log_gap;
  for (std::size_t j = 0; j < n_grid.size(); ++j) {
    const std::size_t n = n_grid[j];
    const std::uint64_t row_seed =
        derive_seed(seed, StreamDomain::Diagnostic, n);
    std::vector<double> values(trials);
    parallel_for(trials, options.threads, [&](std::size_t trial) {
      Stream stream(row_seed, trial);
      values[trial] = bump_value(radius, center,
                                 forward_orbit(finite, x, n, stream));
    });
    const auto orbit = mean_and_stderr(values);
    GapPoint point;
    point.n = n;
    point.gap = std::abs(orbit.mean - ref.mean);
    point.noise = std::hypot(orbit.std_error, ref.std_error);
    point.above_noise = point.gap > 2.0 * point.noise;
    if (point.above_noise) {
      fit_n.push_back(static_cast<double>(n));
      fit_log_gap.push_back(std::log(point.gap));
    }
    report.points.push_back(point);
  }
  if (fit_n.size() >= 3) {
    report.below_noise = false;
    report.theta_hat = -least_squares(fit_n, fit_log_gap).slope;
  }
  return report;
}

// ---------------------------------------------------------------------------
// CSV writers

inline void write_tail_csv(std::ostream &out, const TailCurve &curve) {
  out << "R,exceed,total,p_hat,ci_low,ci_high\n";
  for (std::size_t j = 0; j < curve.radii.size(); ++j) {
    out << format_real(curve.radii[j]) << ',' << curve.exceed_counts[j] << ','
        << curve.total << ',' << format_real(curve.p_hat(j)) << ','
        << format_real(curve.ci_low[j]) << ',' << format_real(curve.ci_high[j])
        << '\n';
  }
}

inline void write_ldp_csv(std::ostream &out, const LdpCurve &curve) {
  out << "n,trials,deviations,freq\n";
  for (std::size_t j = 0; j < curve.n_grid.size(); ++j) {
    out << curve.n_grid[j] << ',' << curve.trials << ','
        << curve.deviations[j] << ',' << format_real(curve.freqs[j]) << '\n';
  }
}

}  // namespace ifstail
