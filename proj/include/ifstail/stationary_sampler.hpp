#pragma once

// Draws from the stationary measure nu of a contracting-on-average generating
// measure by backward iteration z_n = g_1 g_2 ... g_n x, and the forward
// chain x_{k+1} = g_{k+1}(x_k) for cross-checks.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "ifstail/error.hpp"
#include "ifstail/generating_measure.hpp"
#include "ifstail/metric_maps.hpp"
#include "ifstail/parallel.hpp"
#include "ifstail/random.hpp"

namespace ifstail {

struct StationaryDraw {
  Point point;
  std::size_t steps_used = 0;
  double residual_bound = 0.0;
  // max_n was reached before the residual bound fell below the tolerance.
  bool truncated = false;
};

struct SampleSet {
  std::vector<StationaryDraw> draws;
  std::string measure_id;
  std::uint64_t seed = 0;
  double tolerance = 0.0;
  Point start_point;
  double truncation_ceiling = 1e-3;
  // Mass dropped when a countable preset was truncated before sampling.
  double dropped_mass = 0.0;

  std::size_t size() const noexcept { return draws.size(); }
  bool empty() const noexcept { return draws.empty(); }
  std::size_t dimension() const noexcept {
    return draws.empty() ? static_cast<std::size_t>(start_point.size())
                         : static_cast<std::size_t>(draws.front().point.size());
  }

  double truncated_fraction() const noexcept {
    if (draws.empty()) {
      return 0.0;
    }
    std::size_t n = 0;
    for (const auto &d : draws) n += d.truncated ? 1 : 0;
    return static_cast<double>(n) / static_cast<double>(draws.size());
  }

  bool valid() const noexcept {
    return truncated_fraction() <= truncation_ceiling;
  }

  // Wraps externally generated points (synthetic or smoothed data).
  static SampleSet from_points(std::vector<Point> points,
                               std::string id = "external") {
    SampleSet set;
    set.measure_id = std::move(id);
    if (!points.empty()) {
      set.start_point = Point::Zero(points.front().size());
    }
    set.draws.reserve(points.size());
    for (auto &p : points) {
      require(set.draws.empty() ||
                  p.size() == set.draws.front().point.size(),
              ErrorCode::DimensionMismatch,
              "sample points differ in dimension");
      set.draws.push_back({std::move(p), 0, 0.0, false});
    }
    return set;
  }
};

/// A_x = max over atoms of |g(x) - x|.
inline double displacement_bound(const GeneratingMeasure &mu, const Point &x) {
  require(static_cast<std::size_t>(x.size()) == mu.dimension(),
          ErrorCode::DimensionMismatch, "start point dimension mismatch");
  if (mu.is_countable()) {
    // f_n(x) = 0 whenever x <= n, so only the finitely many n < x can move x
    // by something other than |x|.
    const double v = x(0);
    double best = std::abs(v);
    for (std::uint64_t n = 1; static_cast<double>(n) < v; ++n) {
      const double moved =
          std::exp(SpikeSequence::log_slope(n)) * (v - static_cast<double>(n));
      best = std::max(best, std::abs(moved - v));
    }
    return best;
  }
  double best = 0.0;
  for (const auto &atom : mu.atoms()) {
    best = std::max(best, (ifstail::apply(atom.map, x) - x).norm());
  }
  return best;
}

// max_n = ceil(40 log(1/tol) / |chi|).
inline std::size_t default_max_steps(double contraction, double tol) {
  return static_cast<std::size_t>(
      std::ceil(40.0 * std::log(1.0 / tol) / std::abs(contraction)));
}

namespace detail {

// Quantities every backward draw from the same (mu, x) shares.
struct BackwardPlan {
  double contraction = 0.0;
  // log(A_x / (1 - lambda_bar)), lambda_bar = exp(chi / 2); -inf when A_x = 0.
  double log_residual_factor = 0.0;
};

inline BackwardPlan plan_backward(const GeneratingMeasure &mu,
                                  const Point &x) {
  require(!mu.is_countable(), ErrorCode::InvalidArgument,
          "backward sampling needs a finite measure; renormalize the "
          "truncated preset first");
  require_finite(x, "start point");
  BackwardPlan plan;
  plan.contraction = contraction_rate(mu);
  require(plan.contraction < 0.0, ErrorCode::NonContracting,
          "contraction rate is " + std::to_string(plan.contraction) +
              " >= 0; no stationary measure is guaranteed");
  const double lambda_bar = std::exp(plan.contraction / 2.0);
  const double a_x = displacement_bound(mu, x);
  plan.log_residual_factor =
      a_x == 0.0 ? -std::numeric_limits<double>::infinity()
                 : std::log(a_x) - std::log1p(-lambda_bar);
  return plan;
}

// g_{i_1}(g_{i_2}( ... g_{i_n}(x))).
inline Point evaluate_word(const GeneratingMeasure &mu,
                           const std::vector<std::uint32_t> &word,
                           const Point &x) {
  Point y = x;
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    y = ifstail::apply(mu.atoms()[*it].map, y);
  }
  return y;
}

inline StationaryDraw backward_draw(const GeneratingMeasure &mu,
                                    const BackwardPlan &plan, const Point &x,
                                    double tol, std::size_t max_n,
                                    Stream &stream) {
  const double log_tol = std::log(tol);
  double log_product = 0.0;
  std::vector<std::uint32_t> word;
  StationaryDraw draw;
  std::size_t n = 0;
  double log_residual = plan.log_residual_factor;
  while (log_residual > log_tol && n < max_n) {
    const std::size_t i = mu.pick(stream);
    word.push_back(static_cast<std::uint32_t>(i));
    log_product += std::log(mu.lipschitz(i));
    log_residual = log_product + plan.log_residual_factor;
    ++n;
  }
  draw.point = evaluate_word(mu, word, x);
  require(draw.point.allFinite(), ErrorCode::Overflow,
          "backward word produced a non-finite point");
  draw.steps_used = n;
  draw.residual_bound = std::exp(log_residual);
  draw.truncated = log_residual > log_tol;
  return draw;
}

}  // namespace detail

/*
 * One draw from nu. Maps g_1, g_2, ... are drawn from `stream`; the word is
 * extended on the inside (z_n = z_{n-1} applied after g_n) until
 * r_n A_x / (1 - lambda_bar) <= tol, where r_n = prod rho(g_i) and
 * lambda_bar = exp(chi / 2) stands in for the unobservable eventual
 * contraction rate. max_n = 0 selects default_max_steps.
 */
inline StationaryDraw backward_sample(const GeneratingMeasure &mu,
                                      const Point &x, double tol,
                                      std::size_t max_n, Stream &stream) {
  require(tol > 0.0, ErrorCode::InvalidArgument, "tolerance must be positive");
  const auto plan = detail::plan_backward(mu, x);
  if (max_n == 0) {
    max_n = default_max_steps(plan.contraction, tol);
  }
  return detail::backward_draw(mu, plan, x, tol, max_n, stream);
}

struct SamplerOptions {
  unsigned threads = 0;
  double truncation_ceiling = 1e-3;
};

/// `count` independent draws; draw i uses Stream(derive(seed), i).
inline SampleSet sample_batch(const GeneratingMeasure &mu, const Point &x,
                              double tol, std::size_t count, std::size_t max_n,
                              std::uint64_t seed,
                              const SamplerOptions &options = {}) {
  require(tol > 0.0, ErrorCode::InvalidArgument, "tolerance must be positive");
  const GeneratingMeasure finite = mu.renormalized();
  const auto plan = detail::plan_backward(finite, x);
  if (max_n == 0) {
    max_n = default_max_steps(plan.contraction, tol);
  }

  SampleSet set;
  set.measure_id = mu.content_hash();
  set.seed = seed;
  set.tolerance = tol;
  set.start_point = x;
  set.truncation_ceiling = options.truncation_ceiling;
  set.dropped_mass = mu.is_countable() ? 1.0 - mu.truncated_mass() : 0.0;
  set.draws.resize(count);

  const std::uint64_t draw_seed = derive_seed(seed, StreamDomain::Backward);
  parallel_for(count, options.threads, [&](std::size_t i) {
    Stream stream(draw_seed, i);
    set.draws[i] = detail::backward_draw(finite, plan, x, tol, max_n, stream);
  });
  return set;
}

/// g_n o ... o g_1 (x) by successive application.
inline Point forward_orbit(const GeneratingMeasure &mu, const Point &x,
                           std::size_t n, Stream &stream) {
  require(static_cast<std::size_t>(x.size()) == mu.dimension(),
          ErrorCode::DimensionMismatch, "start point dimension mismatch");
  Point y = x;
  for (std::size_t k = 0; k < n; ++k) {
    y = ifstail::apply(mu.atoms()[mu.pick(stream)].map, y);
  }
  return y;
}

/// The partial backward word z_n(x) = g_1 ... g_n x for a fixed n.
inline Point backward_partial(const GeneratingMeasure &mu, const Point &x,
                              std::size_t n, Stream &stream) {
  require(static_cast<std::size_t>(x.size()) == mu.dimension(),
          ErrorCode::DimensionMismatch, "start point dimension mismatch");
  std::vector<std::uint32_t> word(n);
  for (auto &w : word) {
    w = static_cast<std::uint32_t>(mu.pick(stream));
  }
  return detail::evaluate_word(mu, word, x);
}

/// One step of the chain applied to every draw: draw i becomes g_i(z_i) with
/// g_i ~ mu from Stream(derive(seed), i). Stationarity means the result has
/// the same law as the input.
inline SampleSet push_forward(const GeneratingMeasure &mu,
                              const SampleSet &samples, std::uint64_t seed,
                              unsigned threads = 0) {
  require(samples.empty() || samples.dimension() == mu.dimension(),
          ErrorCode::DimensionMismatch, "sample dimension mismatch");
  const GeneratingMeasure finite = mu.renormalized();
  SampleSet out = samples;
  out.seed = seed;
  const std::uint64_t push_seed = derive_seed(seed, StreamDomain::Push);
  parallel_for(samples.size(), threads, [&](std::size_t i) {
    Stream stream(push_seed, i);
    out.draws[i].point = ifstail::apply(
        finite.atoms()[finite.pick(stream)].map, samples.draws[i].point);
  });
  return out;
}

// Shortest round-trip decimal form used by every CSV writer.
inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_samples_csv(std::ostream &out, const SampleSet &set) {
  out << "index";
  for (std::size_t c = 0; c < set.dimension(); ++c) out << ",coord_" << c;
  out << ",steps_used,residual_bound,truncated\n";
  for (std::size_t i = 0; i < set.draws.size(); ++i) {
    const auto &d = set.draws[i];
    out << i;
    for (Eigen::Index c = 0; c < d.point.size(); ++c) {
      out << ',' << format_real(d.point(c));
    }
    out << ',' << d.steps_used << ',' << format_real(d.residual_bound) << ','
        << (d.truncated ? 1 : 0) << '\n';
  }
}

}  // namespace ifstail
