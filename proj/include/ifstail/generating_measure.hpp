#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ifstail/error.hpp"
#include "ifstail/linalg.hpp"
#include "ifstail/metric_maps.hpp"
#include "ifstail/parallel.hpp"
#include "ifstail/random.hpp"
#include "ifstail/stats.hpp"

namespace ifstail {

struct Atom {
  LipschitzMap map;
  double weight = 0.0;
};

/*
 * Closed forms for the countable family f_n(x) = 0 for x <= n and
 * a_n (x - n) for x >= n, carrying weight p_n = 6 / (pi^2 n^2), where
 * a_n = 1/n off the squares and a_{k^2} = k^k on them.
 *
 * Only the first `truncation` atoms are ever materialized.
 */
struct SpikeSequence {
  std::size_t truncation = 10'000;

  // k^k overflows a double beyond k = 143.
  static constexpr std::size_t kMaxTruncation = 20'000;

  static constexpr double kNormalizer = 6.0 / (std::numbers::pi * std::numbers::pi);

  static std::uint64_t integer_sqrt(std::uint64_t n) noexcept {
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
  }
  static bool is_square(std::uint64_t n) noexcept {
    const auto r = integer_sqrt(n);
    return r * r == n;
  }
  static double weight(std::uint64_t n) noexcept {
    const double x = static_cast<double>(n);
    return kNormalizer / (x * x);
  }
  static double log_slope(std::uint64_t n) noexcept {
    if (is_square(n)) {
      const double k = static_cast<double>(integer_sqrt(n));
      return k * std::log(k);
    }
    return -std::log(static_cast<double>(n));
  }
  static PiecewiseLinear1D map(std::uint64_t n) {
    return PiecewiseLinear1D({static_cast<double>(n)}, {0.0}, 0.0,
                             std::exp(log_slope(n)));
  }
  // Upper bound on the weight beyond the truncation: sum_{n>N} 1/n^2 < 1/N.
  double tail_mass_bound() const noexcept {
    return kNormalizer / static_cast<double>(truncation);
  }

  bool operator==(const SpikeSequence &) const = default;
};

/*
 * A probability measure on Lipschitz maps with finitely many atoms, or one of
 * the admitted countable presets (then `atoms` holds its truncation, whose
 * weights fall short of one by the certified tail mass).
 */
class GeneratingMeasure {
 public:
  explicit GeneratingMeasure(std::vector<Atom> atoms)
      : atoms_(std::move(atoms)) {
    validate_atoms();
    double total = 0.0;
    for (const auto &a : atoms_) total += a.weight;
    require(std::abs(total - 1.0) <= 1e-12, ErrorCode::ValidationError,
            "weights sum ≠ 1 (got " + std::to_string(total) + ")");
    finish();
  }

  GeneratingMeasure(std::vector<Atom> truncated, SpikeSequence tail)
      : atoms_(std::move(truncated)), tail_(tail) {
    validate_atoms();
    double total = 0.0;
    for (const auto &a : atoms_) total += a.weight;
    const double missing = 1.0 - total;
    require(missing >= -1e-12 && missing <= tail.tail_mass_bound() + 1e-12,
            ErrorCode::ValidationError,
            "truncated weights plus certified tail mass do not bracket 1");
    finish();
  }

  const std::vector<Atom> &atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  std::size_t dimension() const noexcept { return dimension_; }
  bool is_countable() const noexcept { return tail_.has_value(); }
  const std::optional<SpikeSequence> &tail() const noexcept { return tail_; }
  bool all_affine() const noexcept { return all_affine_; }

  double weight(std::size_t i) const { return atoms_.at(i).weight; }
  double lipschitz(std::size_t i) const { return lipschitz_.at(i); }
  std::span<const double> lipschitz_constants() const noexcept {
    return lipschitz_;
  }

  // Weight of the materialized atoms.
  double truncated_mass() const noexcept { return cumulative_.back(); }

  // Atom index for a uniform variate u in [0, 1), drawn from the
  // materialized atoms renormalized to total mass one.
  std::size_t pick(double u) const noexcept {
    const double target = u * cumulative_.back();
    const auto it =
        std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    const auto idx = static_cast<std::size_t>(it - cumulative_.begin());
    return std::min(idx, atoms_.size() - 1);
  }
  std::size_t pick(Stream &stream) const noexcept {
    return pick(stream.uniform());
  }

  // The materialized atoms as a finite measure of total mass one.
  GeneratingMeasure renormalized() const {
    if (!is_countable()) {
      return *this;
    }
    std::vector<Atom> copy = atoms_;
    const double total = truncated_mass();
    CompensatedSum check;
    for (auto &a : copy) {
      a.weight /= total;
      check.add(a.weight);
    }
    // Rounding residue goes to the first atom.
    copy.front().weight += 1.0 - check.value();
    return GeneratingMeasure(std::move(copy));
  }

  // FNV-1a digest of every parameter, as 16 hex digits.
  std::string content_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const void *data, std::size_t n) {
      const auto *bytes = static_cast<const unsigned char *>(data);
      for (std::size_t i = 0; i < n; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
      }
    };
    auto feed_double = [&feed](double v) { feed(&v, sizeof v); };
    auto feed_matrix = [&](const Matrix &m) {
      for (Eigen::Index i = 0; i < m.size(); ++i) feed_double(m.data()[i]);
    };
    for (const auto &a : atoms_) {
      const std::uint64_t kind = a.map.index();
      feed(&kind, sizeof kind);
      feed_double(a.weight);
      if (const auto *am = std::get_if<AffineMap>(&a.map)) {
        feed_matrix(am->linear());
        feed_matrix(am->translation());
      } else if (const auto *sm = std::get_if<Similarity>(&a.map)) {
        feed_double(sm->scale());
        feed_matrix(sm->rotation());
        feed_matrix(sm->translation());
      } else {
        const auto &pw = std::get<PiecewiseLinear1D>(a.map);
        for (double k : pw.knots()) feed_double(k);
        for (double v : pw.values()) feed_double(v);
        feed_double(pw.left_slope());
        feed_double(pw.right_slope());
      }
    }
    if (tail_) {
      const std::uint64_t n = tail_->truncation;
      feed(&n, sizeof n);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
  }

 private:
  void validate_atoms() {
    require(!atoms_.empty(), ErrorCode::ValidationError,
            "a generating measure needs at least one atom");
    dimension_ = ifstail::dimension(atoms_.front().map);
    for (const auto &a : atoms_) {
      require(std::isfinite(a.weight) && a.weight > 0.0 && a.weight <= 1.0,
              ErrorCode::ValidationError, "every weight must lie in (0, 1]");
      require(ifstail::dimension(a.map) == dimension_,
              ErrorCode::DimensionMismatch,
              "all atoms must act on the same space");
    }
  }

  void finish() {
    lipschitz_.reserve(atoms_.size());
    cumulative_.reserve(atoms_.size());
    double running = 0.0;
    all_affine_ = true;
    for (const auto &a : atoms_) {
      lipschitz_.push_back(lipschitz_constant(a.map));
      running += a.weight;
      cumulative_.push_back(running);
      all_affine_ = all_affine_ && is_affine(a.map);
    }
  }

  std::vector<Atom> atoms_;
  std::optional<SpikeSequence> tail_;
  std::vector<double> lipschitz_;
  std::vector<double> cumulative_;
  std::size_t dimension_ = 0;
  bool all_affine_ = true;
};

// ---------------------------------------------------------------------------
// Contraction rate

struct CertifiedValue {
  double value = 0.0;
  double error_bound = 0.0;
};

inline constexpr double kContractionCertificationTarget = 1e-9;

namespace detail {

// sum_{n >= a} log(n) / n^s for s > 1 by Euler-Maclaurin (integral, half
// term, first derivative correction). The bound is twice the magnitude of the
// last correction used, which dominates the remainder once f'' has a fixed
// sign on [a, inf).
inline CertifiedValue log_power_tail(double a, double s) {
  const double la = std::log(a);
  const double integral =
      std::pow(a, 1.0 - s) * (la / (s - 1.0) + 1.0 / ((s - 1.0) * (s - 1.0)));
  const double f = la / std::pow(a, s);
  const double fprime = (1.0 - s * la) / std::pow(a, s + 1.0);
  return {integral + 0.5 * f - fprime / 12.0, std::abs(fprime) / 6.0};
}

inline CertifiedValue spike_sequence_contraction() {
  // Exact partial sum up to M, then analytic tails of the three series the
  // remainder splits into.
  constexpr std::uint64_t kPartial = 1'000'000;
  constexpr std::uint64_t kRoot = 1'000;  // kRoot^2 == kPartial
  CompensatedSum partial;
  double magnitude = 0.0;
  for (std::uint64_t n = 1; n <= kPartial; ++n) {
    const double term = SpikeSequence::weight(n) * SpikeSequence::log_slope(n);
    partial.add(term);
    magnitude += std::abs(term);
  }
  // Beyond M: all n contribute -log n / n^2, squares k^2 (k > kRoot) are
  // added back as +2 log k / k^4 and contribute +log k / k^3 of their own.
  const auto all = log_power_tail(static_cast<double>(kPartial + 1), 2.0);
  const auto sq4 = log_power_tail(static_cast<double>(kRoot + 1), 4.0);
  const auto sq3 = log_power_tail(static_cast<double>(kRoot + 1), 3.0);
  const double tail =
      SpikeSequence::kNormalizer * (-all.value + 2.0 * sq4.value + sq3.value);
  const double tail_error =
      SpikeSequence::kNormalizer *
      (all.error_bound + 2.0 * sq4.error_bound + sq3.error_bound);
  const double rounding =
      4.0 * std::numeric_limits<double>::epsilon() * magnitude;
  return {partial.value() + tail, tail_error + rounding};
}

}  // namespace detail

/// E[log rho(g)] with a certified error bound (zero for finite support, up to
/// rounding).
inline CertifiedValue contraction_rate_certified(const GeneratingMeasure &mu) {
  if (mu.is_countable()) {
    return detail::spike_sequence_contraction();
  }
  CompensatedSum sum;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    require(mu.lipschitz(i) > 0.0, ErrorCode::ZeroLipschitz,
            "atom " + std::to_string(i) + " has Lipschitz constant 0");
    sum.add(mu.weight(i) * std::log(mu.lipschitz(i)));
  }
  return {sum.value(), 0.0};
}

inline double contraction_rate(const GeneratingMeasure &mu) {
  const auto certified = contraction_rate_certified(mu);
  require(certified.error_bound <= kContractionCertificationTarget,
          ErrorCode::UncertifiableTail,
          "contraction rate truncation error exceeds 1e-9");
  return certified.value;
}

// ---------------------------------------------------------------------------
// Moments E[rho^t]

struct MomentOptions {
  // Partial sums above this are reported as divergent.
  double divergence_bound = 1e12;
};

struct MomentValue {
  bool diverges = false;
  double value = 0.0;
  // Certified upper bound on the omitted remainder (countable presets);
  // the moment lies in [value, value + tail_bound].
  double tail_bound = 0.0;
  // Atom index (0-based, finite case) or series index n (countable case)
  // that witnesses divergence.
  std::size_t witness = 0;
};

inline MomentValue moment(const GeneratingMeasure &mu, double t,
                          const MomentOptions &options = {}) {
  require(std::isfinite(t), ErrorCode::InvalidArgument,
          "moment order must be finite");
  if (t == 0.0) {
    return {false, 1.0, 0.0, 0};
  }
  const double log_bound = std::log(options.divergence_bound);

  if (!mu.is_countable()) {
    CompensatedSum sum;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      const double rho = mu.lipschitz(i);
      require(rho > 0.0 || t > 0.0, ErrorCode::ZeroLipschitz,
              "negative moment of an atom with Lipschitz constant 0");
      const double log_term = std::log(mu.weight(i)) + t * std::log(rho);
      if (log_term > log_bound) {
        return {true, std::numeric_limits<double>::infinity(), 0.0, i};
      }
      sum.add(std::exp(log_term));
      if (sum.value() > options.divergence_bound) {
        return {true, std::numeric_limits<double>::infinity(), 0.0, i};
      }
    }
    return {false, sum.value(), 0.0, 0};
  }

  const std::size_t truncation = mu.tail()->truncation;
  CompensatedSum sum;
  std::size_t first_large_square = 0;
  for (std::uint64_t n = 1; n <= truncation; ++n) {
    const double log_term =
        std::log(SpikeSequence::weight(n)) + t * SpikeSequence::log_slope(n);
    if (log_term > log_bound) {
      return {true, std::numeric_limits<double>::infinity(), 0.0, n};
    }
    if (first_large_square == 0 && log_term >= 0.0 &&
        SpikeSequence::is_square(n)) {
      first_large_square = n;
    }
    sum.add(std::exp(log_term));
    if (sum.value() > options.divergence_bound) {
      return {true, std::numeric_limits<double>::infinity(), 0.0, n};
    }
  }
  // Term tests. For t > 0 the square-index terms k^{kt - 4} grow without
  // bound; for t <= -1 the off-square terms behave like n^{-t-2}, a
  // divergent p-series.
  if (t > 0.0) {
    const std::size_t witness =
        first_large_square != 0 ? first_large_square : truncation;
    return {true, std::numeric_limits<double>::infinity(), 0.0, witness};
  }
  if (t <= -1.0) {
    return {true, std::numeric_limits<double>::infinity(), 0.0, truncation};
  }
  // Every remaining term is at most p_n n^{-t}; integral bound on that tail.
  const double exponent = 1.0 + t;  // in (0, 1)
  const double tail_bound =
      SpikeSequence::kNormalizer *
      std::pow(static_cast<double>(truncation), -exponent) / exponent;
  return {false, sum.value(), tail_bound, 0};
}

// ---------------------------------------------------------------------------
// Supremum of the Lipschitz constants over the support

struct SupremumBound {
  bool unbounded = false;
  double value = 0.0;
};

inline SupremumBound rho_sup(const GeneratingMeasure &mu) {
  if (mu.is_countable()) {
    // a_{k^2} = k^k has no upper bound.
    return {true, std::numeric_limits<double>::infinity()};
  }
  const auto rhos = mu.lipschitz_constants();
  return {false, *std::max_element(rhos.begin(), rhos.end())};
}

// ---------------------------------------------------------------------------
// Lyapunov exponent

struct LyapunovOptions {
  unsigned threads = 0;
  // Upper limit on n * trials.
  double work_budget = 2e9;
};

/*
 * Mean over trials of (1/n) log rho(g_1 ... g_n) for i.i.d. g_i ~ mu, with
 * its standard error. Affine words are accumulated as rescaled matrix
 * products; piecewise words are composed explicitly.
 */
inline MeanEstimate lyapunov_estimate(const GeneratingMeasure &mu,
                                      std::size_t n, std::size_t trials,
                                      std::uint64_t seed,
                                      const LyapunovOptions &options = {}) {
  require(!mu.is_countable(), ErrorCode::InvalidArgument,
          "Lyapunov estimation needs a finitely supported measure");
  require(n >= 1 && trials >= 1, ErrorCode::InvalidArgument,
          "n and trials must be positive");
  require(static_cast<double>(n) * static_cast<double>(trials) <=
              options.work_budget,
          ErrorCode::WorkBudgetExceeded,
          "n * trials exceeds the configured work budget");

  const std::uint64_t trial_seed = derive_seed(seed, StreamDomain::Lyapunov);
  std::vector<double> per_trial(trials);
  const auto dim = static_cast<Eigen::Index>(mu.dimension());
  parallel_for(trials, options.threads, [&](std::size_t trial) {
    Stream stream(trial_seed, trial);
    double log_norm = 0.0;
    if (mu.all_affine()) {
      ScaledProduct product(dim);
      for (std::size_t k = 0; k < n; ++k) {
        product.right_multiply(linear_part(mu.atoms()[mu.pick(stream)].map));
      }
      log_norm = product.log_norm();
    } else {
      LipschitzMap word = mu.atoms()[mu.pick(stream)].map;
      for (std::size_t k = 1; k < n; ++k) {
        word = compose(word, mu.atoms()[mu.pick(stream)].map);
      }
      const double rho = lipschitz_constant(word);
      require(std::isfinite(rho), ErrorCode::Overflow,
              "Lipschitz constant of the composed word overflowed");
      log_norm = std::log(rho);
    }
    per_trial[trial] = log_norm / static_cast<double>(n);
  });
  return mean_and_stderr(per_trial);
}

// ---------------------------------------------------------------------------
// Cramér rate function of log rho

// log E[rho^t] by a shifted log-sum-exp.
inline double log_moment_generating(const GeneratingMeasure &mu, double t) {
  std::vector<double> terms(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    terms[i] = std::log(mu.weight(i)) + t * std::log(mu.lipschitz(i));
  }
  return log_sum_exp(terms);
}

struct RateFunctionOptions {
  std::size_t coarse_points = 801;
  double t_tolerance = 1e-10;
};

struct RateFunction {
  std::vector<double> grid;
  // +inf marks points where a deviation is impossible.
  std::vector<double> values;
  double t_max = 200.0;

  // I >= 0 and three-point convexity (slack 1e-8) on consecutive finite
  // values. Throws ValidationError when violated.
  void check_invariants() const {
    for (std::size_t i = 0; i < values.size(); ++i) {
      require(values[i] >= 0.0, ErrorCode::ValidationError,
              "rate function is negative");
    }
    for (std::size_t i = 1; i + 1 < values.size(); ++i) {
      if (!std::isfinite(values[i - 1]) || !std::isfinite(values[i + 1])) {
        continue;
      }
      const double span = grid[i + 1] - grid[i - 1];
      const double chord = ((grid[i + 1] - grid[i]) * values[i - 1] +
                            (grid[i] - grid[i - 1]) * values[i + 1]) /
                           span;
      require(values[i] <= chord + 1e-8, ErrorCode::ValidationError,
              "rate function is not convex on the grid");
    }
  }
};

/// sup over |t| <= t_max of t x - log E[rho^t].
inline double rate_at(const GeneratingMeasure &mu, double x, double t_max,
                      const RateFunctionOptions &options = {}) {
  require(t_max > 0.0, ErrorCode::InvalidArgument, "t_max must be positive");
  require(!mu.is_countable(), ErrorCode::InvalidArgument,
          "the rate function needs a finitely supported measure");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    require(mu.lipschitz(i) > 0.0, ErrorCode::ZeroLipschitz,
            "atom with Lipschitz constant 0");
    lo = std::min(lo, std::log(mu.lipschitz(i)));
    hi = std::max(hi, std::log(mu.lipschitz(i)));
  }
  if (x < lo || x > hi) {
    return std::numeric_limits<double>::infinity();
  }
  auto objective = [&](double t) {
    return t * x - log_moment_generating(mu, t);
  };

  const std::size_t m = std::max<std::size_t>(options.coarse_points, 3);
  const double step = 2.0 * t_max / static_cast<double>(m - 1);
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m; ++j) {
    const double v = objective(-t_max + step * static_cast<double>(j));
    if (v > best_value) {
      best_value = v;
      best = j;
    }
  }
  // Golden-section refinement inside the neighbouring coarse cells; the
  // objective is concave.
  double a = -t_max + step * static_cast<double>(best == 0 ? 0 : best - 1);
  double b = -t_max + step * static_cast<double>(std::min(best + 1, m - 1));
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  while (b - a > options.t_tolerance) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = objective(d);
    }
  }
  const double refined = objective(0.5 * (a + b));
  return std::max({0.0, best_value, refined, fc, fd});
}

inline RateFunction rate_function(const GeneratingMeasure &mu,
                                  std::span<const double> x_grid,
                                  double t_max = 200.0,
                                  const RateFunctionOptions &options = {}) {
  require(!x_grid.empty(), ErrorCode::InvalidArgument, "empty x grid");
  require(t_max > 0.0, ErrorCode::InvalidArgument, "t_max must be positive");
  for (std::size_t i = 1; i < x_grid.size(); ++i) {
    require(x_grid[i] > x_grid[i - 1], ErrorCode::InvalidArgument,
            "x grid must be increasing");
  }
  RateFunction rate;
  rate.grid.assign(x_grid.begin(), x_grid.end());
  rate.t_max = t_max;
  rate.values.reserve(x_grid.size());
  for (double x : x_grid) {
    rate.values.push_back(rate_at(mu, x, t_max, options));
  }
  rate.check_invariants();
  return rate;
}

}  // namespace ifstail
