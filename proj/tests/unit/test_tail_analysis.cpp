#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "ifstail/generating_measure.hpp"
#include "ifstail/presets.hpp"
#include "ifstail/stationary_sampler.hpp"
#include "ifstail/tail_analysis.hpp"

using namespace ifstail;

namespace {

ErrorCode code_of(auto &&f) {
  try {
    f();
  } catch (const Error &e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::IoError;
}

// |y| = U^{-1/alpha} has P(|y| >= R) = R^{-alpha} on R >= 1; the sign is a
// fair coin.
SampleSet pareto_samples(double alpha, std::size_t n, std::uint64_t seed) {
  std::vector<Point> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Stream s(seed, i);
    const double u = 1.0 - s.uniform();
    const double r = std::pow(u, -1.0 / alpha);
    pts.push_back(make_point({s.uniform() < 0.5 ? -r : r}));
  }
  return SampleSet::from_points(std::move(pts), "pareto");
}

// Inverse CDF on the stratified grid u_i = (i + 1/2) / n, so every empirical
// tail probability is within 1/n of R^{-alpha}.
SampleSet stratified_pareto(double alpha, std::size_t n) {
  std::vector<Point> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    pts.push_back(make_point({std::pow(u, -1.0 / alpha)}));
  }
  return SampleSet::from_points(std::move(pts), "pareto");
}

std::vector<double> geometric(double r0, double ratio, int count) {
  std::vector<double> r;
  for (int j = 0; j < count; ++j) r.push_back(r0 * std::pow(ratio, j));
  return r;
}

// P(|n chi - sum log rho| > eps n) for prime_q(5): the number k of expanding
// steps is Binomial(n, 1/3) and the sum is k log 1.25 + (n - k) log 0.625.
double exact_factorwise_probability(std::size_t n, double eps) {
  const double chi = std::log(1.25) / 3.0 + 2.0 * std::log(0.625) / 3.0;
  double p = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double kk = static_cast<double>(k);
    const double nn = static_cast<double>(n);
    const double sum = kk * std::log(1.25) + (nn - kk) * std::log(0.625);
    if (std::abs(nn * chi - sum) > eps * nn) {
      p += std::exp(std::lgamma(nn + 1) - std::lgamma(kk + 1) -
                    std::lgamma(nn - kk + 1) + kk * std::log(1.0 / 3.0) +
                    (nn - kk) * std::log(2.0 / 3.0));
    }
  }
  return p;
}

}  // namespace

TEST(EmpiricalTail, PointMass) {
  const auto set = SampleSet::from_points(
      std::vector<Point>(50, make_point({2.0})));
  const std::vector<double> radii = {1.0, 3.0};
  const auto curve = empirical_tail(set, make_point({0.0}), radii);
  EXPECT_EQ(curve.exceed_counts, (std::vector<std::size_t>{50, 0}));
  EXPECT_EQ(curve.total, 50u);
  EXPECT_EQ(curve.p_hat(0), 1.0);
}

TEST(EmpiricalTail, BoundaryDistanceCounts) {
  const auto set = SampleSet::from_points({make_point({-2.0}), make_point({1.0})});
  const std::vector<double> radii = {1.0, 2.0, 2.5};
  const auto curve = empirical_tail(set, make_point({0.0}), radii);
  EXPECT_EQ(curve.exceed_counts, (std::vector<std::size_t>{2, 1, 0}));
}

TEST(EmpiricalTail, BernoulliHasCompactSupport) {
  const auto set = sample_batch(presets::bernoulli(), make_point({0.0}), 1e-8,
                                20'000, 0, 3);
  const std::vector<double> radii = {1.0, 2.5};
  const auto curve = empirical_tail(set, make_point({0.0}), radii);
  EXPECT_GT(curve.exceed_counts[0], 0u);
  EXPECT_EQ(curve.exceed_counts[1], 0u);
}

TEST(EmpiricalTail, StratifiedParetoInsideWilsonIntervals) {
  const auto set = stratified_pareto(2.0, 100'000);
  const auto radii = geometric(1.5, std::sqrt(2.0), 12);
  const auto curve = empirical_tail(set, make_point({0.0}), radii);
  for (std::size_t j = 0; j < radii.size(); ++j) {
    const double truth = std::pow(radii[j], -2.0);
    EXPECT_LE(curve.ci_low[j], truth) << radii[j];
    EXPECT_GE(curve.ci_high[j], truth) << radii[j];
  }
}

TEST(EmpiricalTail, RandomParetoMatchesPowerLaw) {
  const auto set = pareto_samples(2.0, 100'000, 21);
  const auto radii = geometric(2.0, 2.0, 6);
  const auto curve = empirical_tail(set, make_point({0.0}), radii);
  for (std::size_t j = 0; j < radii.size(); ++j) {
    const double truth = std::pow(radii[j], -2.0);
    const double sd = std::sqrt(truth * (1 - truth) / 100'000.0);
    EXPECT_NEAR(curve.p_hat(j), truth, 4.0 * sd) << radii[j];
  }
}

TEST(EmpiricalTail, Errors) {
  const std::vector<double> radii = {1.0};
  EXPECT_EQ(code_of([&] {
              empirical_tail(SampleSet{}, make_point({0.0}), radii);
            }),
            ErrorCode::EmptySampleSet);
  const auto set = SampleSet::from_points({make_point({1.0})});
  const std::vector<double> bad = {2.0, 1.0};
  EXPECT_EQ(code_of([&] { empirical_tail(set, make_point({0.0}), bad); }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { empirical_tail(set, make_point({0.0, 0.0}), radii); }),
            ErrorCode::DimensionMismatch);
}

TEST(EmpiricalTail, MonotoneAndBracketed) {
  Stream s(8, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto set = pareto_samples(0.5 + 3.0 * s.uniform(), 500, 100 + trial);
    std::vector<double> radii;
    double r = 0.1 + s.uniform();
    for (int j = 0; j < 15; ++j) {
      radii.push_back(r);
      r += 0.01 + 5.0 * s.uniform();
    }
    const auto curve = empirical_tail(set, make_point({0.0}), radii);
    for (std::size_t j = 0; j < radii.size(); ++j) {
      EXPECT_LE(curve.exceed_counts[j], curve.total);
      EXPECT_LE(curve.ci_low[j], curve.p_hat(j) + 1e-15);
      EXPECT_GE(curve.ci_high[j], curve.p_hat(j) - 1e-15);
      if (j > 0) {
        EXPECT_LE(curve.exceed_counts[j], curve.exceed_counts[j - 1]);
      }
    }
  }
}

TEST(AutoRadii, GeometricFromMedian) {
  const auto set = stratified_pareto(1.0, 1001);
  const auto radii = auto_radii(set, make_point({0.0}));
  ASSERT_GE(radii.size(), 2u);
  EXPECT_NEAR(radii[0], 2.0, 1e-2);
  for (std::size_t j = 1; j < radii.size(); ++j) {
    EXPECT_NEAR(radii[j] / radii[j - 1], std::sqrt(2.0), 1e-12);
  }
  EXPECT_LE(radii.back(), 2002.0);
}

TEST(AutoRadii, DegenerateSets) {
  const auto at_center = SampleSet::from_points(
      std::vector<Point>(10, make_point({0.0})));
  EXPECT_EQ(code_of([&] { auto_radii(at_center, make_point({0.0})); }),
            ErrorCode::InsufficientTailData);
  std::vector<Point> pts(10, make_point({0.0}));
  pts.push_back(make_point({3.0}));
  const auto radii = auto_radii(SampleSet::from_points(pts), make_point({0.0}));
  EXPECT_EQ(radii.front(), 3.0);
}

TEST(FitTail, ExactPowerLaw) {
  TailCurve curve;
  curve.total = 100'000'000;
  for (int j = 1; j <= 10; ++j) {
    const double r = std::ldexp(1.0, j);
    curve.radii.push_back(r);
    curve.exceed_counts.push_back(static_cast<std::size_t>(
        std::llround(1e8 * std::pow(r, -2.0))));
  }
  const auto fit = fit_tail_exponent(curve);
  EXPECT_NEAR(fit.alpha_hat, 2.0, 0.01);
  EXPECT_GT(fit.r_squared, 0.9999);
  EXPECT_EQ(fit.radii_used.size(), 10u);
  EXPECT_LE(fit.ols_std_error, fit.std_error);
}

TEST(FitTail, UsesOnlyRadiiWithEnoughExceedances) {
  TailCurve curve;
  curve.total = 1000;
  curve.radii = {1, 2, 4, 8, 16};
  curve.exceed_counts = {1000, 250, 62, 29, 3};
  const auto fit = fit_tail_exponent(curve, 30);
  EXPECT_EQ(fit.radii_used, (std::vector<double>{1, 2, 4}));
  EXPECT_EQ(code_of([&] { fit_tail_exponent(curve, 100); }),
            ErrorCode::InsufficientTailData);
}

TEST(FitTail, CompactSupportIsInsufficient) {
  TailCurve curve;
  curve.total = 1000;
  curve.radii = {1, 2, 4, 8};
  curve.exceed_counts = {0, 0, 0, 0};
  EXPECT_EQ(code_of([&] { fit_tail_exponent(curve); }),
            ErrorCode::InsufficientTailData);
}

TEST(FitTail, ConsistentOnSyntheticPareto) {
  // Two decades of radii; the usable range is cut where fewer than 30 draws
  // remain.
  const auto radii = geometric(1.0, std::sqrt(std::sqrt(10.0)), 9);
  int covered = 0;
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    const auto set = pareto_samples(2.0, 100'000, 1000 + rep);
    const auto fit =
        fit_tail_exponent(empirical_tail(set, make_point({0.0}), radii));
    if (std::abs(fit.alpha_hat - 2.0) <= 2.0 * fit.std_error) ++covered;
  }
  EXPECT_GE(covered, 90);
}

TEST(LowerBound, PrimeQ5) {
  const auto lb = lower_bound_exponent(presets::prime_q(5));
  EXPECT_NEAR(lb.alpha_1, -std::log(1.0 / 3.0) / std::log(1.25), 1e-15);
  EXPECT_NEAR(lb.alpha_1, 4.923343, 1e-6);
  EXPECT_EQ(lb.atom_index, 0u);
  EXPECT_NEAR(lb.fixed_point(0), -4.0, 1e-12);
}

TEST(LowerBound, TightestExpandingAtomWins) {
  const GeneratingMeasure mu({{Similarity::scalar(2.0, 1.0), 0.5},
                              {Similarity::scalar(1.1, 0.0), 0.01},
                              {Similarity::scalar(0.1, 0.0), 0.49}});
  const auto lb = lower_bound_exponent(mu);
  EXPECT_NEAR(lb.alpha_1, 1.0, 1e-15);
  EXPECT_EQ(lb.atom_index, 0u);
  EXPECT_NEAR(-std::log(0.01) / std::log(1.1), 48.3177, 1e-4);
  EXPECT_NEAR(lb.fixed_point(0), -1.0, 1e-12);
}

TEST(LowerBound, NoExpandingAtom) {
  EXPECT_EQ(code_of([&] { lower_bound_exponent(presets::bernoulli()); }),
            ErrorCode::NoExpandingAtom);
  EXPECT_EQ(code_of([&] { lower_bound_exponent(presets::compact_flip()); }),
            ErrorCode::NoExpandingAtom);
}

TEST(LowerBound, BracketsFittedExponent) {
  for (int q : {5, 7}) {
    const auto mu = presets::prime_q(q);
    const auto set = sample_batch(mu, make_point({0.0}), 1e-8, 100'000, 0, 11);
    const auto lb = lower_bound_exponent(mu);
    const auto center = default_tail_center(mu, set);
    EXPECT_EQ(center, lb.fixed_point);
    const auto radii = auto_radii(set, center);
    const auto fit = fit_tail_exponent(empirical_tail(set, center, radii));
    EXPECT_GT(fit.alpha_hat, 0.0) << q;
    EXPECT_LE(fit.alpha_hat, lb.alpha_1 + 2.0 * fit.std_error) << q;
  }
}

TEST(DefaultCenter, SampleMeanWithoutExpandingAtom) {
  const auto set =
      SampleSet::from_points({make_point({1.0}), make_point({3.0})});
  EXPECT_EQ(default_tail_center(presets::bernoulli(), set), make_point({2.0}));
}

TEST(Ldp, SingleRhoNeverDeviates) {
  const std::vector<std::size_t> grid = {1, 10, 100};
  const auto curve = ldp_empirical(presets::bernoulli(), 1e-6, grid, 1000, 1,
                                   LdpVariant::Factorwise);
  for (double f : curve.freqs) EXPECT_EQ(f, 0.0);
  EXPECT_TRUE(ldp_rate_fit(curve).infinite());
}

TEST(Ldp, BoundedIncrementsCapDeviations) {
  const auto mu = presets::prime_q(5);
  const double chi = contraction_rate(mu);
  EXPECT_NEAR(std::max(std::abs(std::log(1.25) - chi),
                       std::abs(std::log(0.625) - chi)),
              0.462, 1e-3);
  const std::vector<std::size_t> grid = {1, 2, 5, 10};
  const auto curve =
      ldp_empirical(mu, 0.463, grid, 2000, 4, LdpVariant::Factorwise);
  for (auto d : curve.deviations) EXPECT_EQ(d, 0u);
  // Below the cap a single expanding step already deviates.
  const std::vector<std::size_t> one = {1};
  const auto loose = ldp_empirical(mu, 0.3, one, 30'000, 4, LdpVariant::Factorwise);
  EXPECT_NEAR(loose.freqs[0], 1.0 / 3.0, 4.0 * std::sqrt(2.0 / 9.0 / 30'000));
}

TEST(Ldp, MatchesExactBinomialProbabilities) {
  const auto mu = presets::prime_q(5);
  const std::vector<std::size_t> grid = {10, 25, 50, 100};
  const std::size_t trials = 40'000;
  const auto curve =
      ldp_empirical(mu, 0.1, grid, trials, 2, LdpVariant::Factorwise);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double p = exact_factorwise_probability(grid[j], 0.1);
    EXPECT_NEAR(curve.freqs[j], p, 4.0 * std::sqrt(p * (1 - p) / trials) + 1e-12)
        << grid[j];
  }
  EXPECT_NEAR(exact_factorwise_probability(50, 0.1), 0.0349, 1e-4);
}

TEST(Ldp, FrequenciesNestInEpsilon) {
  const auto mu = presets::prime_q(5);
  const std::vector<std::size_t> grid = {20, 50};
  std::vector<std::size_t> previous = {SIZE_MAX, SIZE_MAX};
  for (double eps : {0.02, 0.05, 0.1, 0.2}) {
    const auto curve = ldp_empirical(mu, eps, grid, 5000, 6, LdpVariant::Factorwise);
    for (std::size_t j = 0; j < grid.size(); ++j) {
      EXPECT_LE(curve.deviations[j], previous[j]) << eps;
      EXPECT_GE(curve.freqs[j], 0.0);
      EXPECT_LE(curve.freqs[j], 1.0);
    }
    previous = curve.deviations;
  }
}

TEST(Ldp, ThreadCountDoesNotChangeResults) {
  const auto mu = presets::prime_q(5);
  const std::vector<std::size_t> grid = {5, 20, 40};
  const auto a = ldp_empirical(mu, 0.1, grid, 3000, 9, LdpVariant::Factorwise, {1});
  const auto b = ldp_empirical(mu, 0.1, grid, 3000, 9, LdpVariant::Factorwise, {4});
  EXPECT_EQ(a.deviations, b.deviations);
  const auto c = ldp_empirical(mu, 0.1, grid, 3000, 9, LdpVariant::Product, {1});
  const auto d = ldp_empirical(mu, 0.1, grid, 3000, 9, LdpVariant::Product, {3});
  EXPECT_EQ(c.deviations, d.deviations);
  EXPECT_EQ(c.reference, d.reference);
}

TEST(Ldp, ProductVariantUsesLyapunovReference) {
  const auto mu = presets::prime_q(5);
  const std::vector<std::size_t> grid = {10, 40};
  const auto curve = ldp_empirical(mu, 0.1, grid, 5000, 3, LdpVariant::Product);
  const std::vector<std::size_t> last = {40};
  EXPECT_TRUE(curve.reference_estimated);
  EXPECT_GT(curve.reference_stderr, 0.0);
  EXPECT_NEAR(curve.reference, contraction_rate(mu),
              4.0 * curve.reference_stderr);
  // Shear: every word has the same norm, so at the reference length nothing
  // deviates.
  const auto shear =
      ldp_empirical(presets::shear_matrix(), 0.01, last, 1000, 3, LdpVariant::Product);
  for (auto dv : shear.deviations) EXPECT_EQ(dv, 0u);
  EXPECT_EQ(shear.reference_stderr, 0.0);
}

TEST(Ldp, PiecewiseAtomsComposeWords) {
  const GeneratingMeasure mu({{PiecewiseLinear1D({0.0}, {0.0}, 0.5, 2.0), 0.5},
                              {AffineMap::scalar(0.25, 1.0), 0.5}});
  const std::vector<std::size_t> grid = {1, 3};
  const auto curve = ldp_empirical(mu, 0.05, grid, 1000, 5, LdpVariant::Product);
  EXPECT_EQ(curve.freqs.size(), 2u);
  for (double f : curve.freqs) {
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0);
  }
}

TEST(Ldp, Errors) {
  const auto mu = presets::prime_q(5);
  const std::vector<std::size_t> grid = {10, 20};
  EXPECT_EQ(code_of([&] {
              ldp_empirical(mu, 0.1, grid, 999, 1, LdpVariant::Factorwise);
            }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] {
              ldp_empirical(mu, 0.1, grid, 1000, 1, LdpVariant::Factorwise,
                            {0, 1e4});
            }),
            ErrorCode::WorkBudgetExceeded);
  const std::vector<std::size_t> unsorted = {20, 10};
  EXPECT_EQ(code_of([&] {
              ldp_empirical(mu, 0.1, unsorted, 1000, 1, LdpVariant::Factorwise);
            }),
            ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] {
              ldp_empirical(presets::sequence_example(), 0.1, grid, 1000, 1,
                            LdpVariant::Factorwise);
            }),
            ErrorCode::InvalidArgument);
}

TEST(RateFit, ExactExponential) {
  LdpCurve curve;
  curve.n_grid = {50, 100, 200, 400};
  for (auto n : curve.n_grid) curve.freqs.push_back(std::exp(-0.05 * n));
  const auto fit = ldp_rate_fit(curve);
  EXPECT_NEAR(fit.delta_hat, 0.05, 1e-6);
  EXPECT_NEAR(fit.std_error, 0.0, 1e-9);
}

TEST(RateFit, ZeroRowsAreSkipped) {
  LdpCurve curve;
  curve.n_grid = {10, 20, 30, 40};
  curve.freqs = {std::exp(-1.0), std::exp(-2.0), std::exp(-3.0), 0.0};
  EXPECT_NEAR(ldp_rate_fit(curve).delta_hat, 0.1, 1e-12);
  curve.freqs[2] = 0.0;
  EXPECT_EQ(code_of([&] { ldp_rate_fit(curve); }),
            ErrorCode::InsufficientLdpData);
}

TEST(RateFit, BoundedByCramerRate) {
  const auto mu = presets::prime_q(5);
  const double chi = contraction_rate(mu);
  const double eps = 0.1;
  const double rate = std::min(rate_at(mu, chi - eps, 200.0),
                               rate_at(mu, chi + eps, 200.0));
  EXPECT_NEAR(rate, 0.0443706, 1e-6);
  const std::vector<std::size_t> grid = {25, 50, 75, 100};
  const auto curve =
      ldp_empirical(mu, eps, grid, 100'000, 1, LdpVariant::Factorwise);
  for (std::size_t j = 1; j < grid.size(); ++j) {
    EXPECT_LT(curve.freqs[j], curve.freqs[j - 1]);
  }
  const auto fit = ldp_rate_fit(curve);
  EXPECT_GT(fit.delta_hat, 0.0);
  EXPECT_LE(fit.delta_hat, 1.5 * rate);
}

TEST(Bump, Examples) {
  const Point x = make_point({0.0});
  EXPECT_EQ(bump_value(4.0, x, make_point({2.0})), 0.0);
  EXPECT_EQ(bump_value(4.0, x, make_point({-4.0})), 1.0);
  EXPECT_EQ(bump_value(4.0, x, make_point({3.0})), 0.5);
  EXPECT_EQ(bump_value(4.0, x, make_point({0.0})), 0.0);
  EXPECT_EQ(bump_value(4.0, x, make_point({100.0})), 1.0);
  EXPECT_NEAR(bump_value(2.0, make_point({0.0, 0.0}), make_point({0.9, 1.2})),
              0.5, 1e-15);
  EXPECT_EQ(code_of([&] { bump_value(0.0, x, x); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { bump_value(1.0, x, make_point({0.0, 1.0})); }),
            ErrorCode::DimensionMismatch);
}

TEST(Bump, LipschitzAndBounded) {
  Stream s(31, 0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double r = 0.1 + 10.0 * s.uniform();
    const Point x = make_point({s.normal(), s.normal()});
    const Point y = x + 2.0 * r * make_point({s.normal(), s.normal()});
    const Point z = x + 2.0 * r * make_point({s.normal(), s.normal()});
    const double fy = bump_value(r, x, y);
    const double fz = bump_value(r, x, z);
    EXPECT_GE(fy, 0.0);
    EXPECT_LE(fy, 1.0);
    EXPECT_LE(std::abs(fy - fz), (2.0 / r) * (y - z).norm() + 1e-12);
    if ((y - x).norm() <= 0.5 * r) {
      EXPECT_EQ(fy, 0.0);
    }
    if ((y - x).norm() >= r) {
      EXPECT_EQ(fy, 1.0);
    }
  }
}

TEST(Diagnostic, SingleContractionConverges) {
  const GeneratingMeasure mu({{AffineMap::scalar(0.5, 1.0), 1.0}});
  const std::vector<std::size_t> grid = {0, 1, 2, 22, 30};
  DiagnosticOptions opt;
  opt.center = make_point({2.0});
  const auto report =
      convergence_diagnostic(mu, make_point({0.0}), 1.0, grid, 200, 1, opt);
  ASSERT_EQ(report.points.size(), grid.size());
  EXPECT_EQ(report.reference_mean, 0.0);
  // n = 0 is the start point itself, at distance 2 from the center.
  EXPECT_EQ(report.points[0].gap, 1.0);
  EXPECT_EQ(report.points[3].gap, 0.0);
  EXPECT_EQ(report.points[4].gap, 0.0);
  EXPECT_TRUE(report.below_noise);
  EXPECT_TRUE(std::isnan(report.theta_hat));
}

TEST(Diagnostic, ZeroStepsComparesStartPoint) {
  const auto mu = presets::bernoulli();
  const std::vector<std::size_t> grid = {0};
  const auto report =
      convergence_diagnostic(mu, make_point({0.0}), 2.0, grid, 500, 4);
  // f(x) = 0 at the center; the uniform law on [-2, 2] gives E f = 1/4.
  EXPECT_NEAR(report.points[0].gap, report.reference_mean, 1e-15);
  EXPECT_NEAR(report.reference_mean, 0.25, 0.02);
}

TEST(Diagnostic, PrimeQGapsShrinkIntoNoise) {
  const auto mu = presets::prime_q(5);
  const std::vector<std::size_t> grid = {1, 2, 4, 8, 16, 30};
  const auto report =
      convergence_diagnostic(mu, make_point({0.0}), 8.0, grid, 10'000, 2);
  EXPECT_FALSE(report.points.back().above_noise);
  EXPECT_LE(report.points.back().gap, report.points.front().gap);
  EXPECT_EQ(code_of([&] {
              DiagnosticOptions small;
              small.reference_size = 10;
              convergence_diagnostic(mu, make_point({0.0}), 8.0, grid, 10, 2,
                                     small);
            }),
            ErrorCode::InvalidArgument);
}

TEST(Csv, TailAndLdpLayouts) {
  TailCurve curve;
  curve.radii = {1.0, 2.0};
  curve.exceed_counts = {4, 1};
  curve.total = 4;
  curve.ci_low = {0.5, 0.05};
  curve.ci_high = {1.0, 0.7};
  std::ostringstream tail;
  write_tail_csv(tail, curve);
  EXPECT_EQ(tail.str(),
            "R,exceed,total,p_hat,ci_low,ci_high\n"
            "1,4,4,1,0.5,1\n"
            "2,1,4,0.25,0.050000000000000003,0.69999999999999996\n");

  LdpCurve ldp;
  ldp.n_grid = {10};
  ldp.trials = 1000;
  ldp.deviations = {5};
  ldp.freqs = {0.005};
  std::ostringstream out;
  write_ldp_csv(out, ldp);
  EXPECT_EQ(out.str(), "n,trials,deviations,freq\n10,1000,5,0.0050000000000000001\n");
}
