#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "ifstail/presets.hpp"
#include "ifstail/stationary_sampler.hpp"
#include "ifstail/stats.hpp"

using namespace ifstail;

namespace {

std::vector<double> first_coords(const SampleSet &set) {
  std::vector<double> out;
  for (const auto &d : set.draws) out.push_back(d.point(0));
  return out;
}

// sup_x |F_n(x) - (x + 2) / 4| for the uniform law on [-2, 2].
double ks_uniform(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = std::clamp((v[i] + 2.0) / 4.0, 0.0, 1.0);
    worst = std::max({worst, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  return worst;
}

}  // namespace

TEST(DisplacementBound, Examples) {
  EXPECT_EQ(displacement_bound(presets::prime_q(5), make_point({0.0})), 1.0);
  EXPECT_EQ(displacement_bound(presets::single_contraction(), make_point({2.0})),
            0.0);
  EXPECT_EQ(displacement_bound(presets::sequence_example(), make_point({0.0})),
            0.0);
}

TEST(DisplacementBound, CountableClosedFormMatchesAtomScan) {
  const auto mu = presets::sequence_example(100);
  for (double x : {-3.0, 0.5, 2.5, 5.0, 9.5, 17.0}) {
    double brute = 0.0;
    for (const auto &a : mu.atoms()) {
      brute = std::max(brute, std::abs(ifstail::apply(a.map, make_point({x}))(0) - x));
    }
    EXPECT_DOUBLE_EQ(displacement_bound(mu, make_point({x})), brute) << x;
  }
}

TEST(BackwardSample, SingleContraction) {
  Stream s(1, 0);
  const auto d = backward_sample(presets::single_contraction(),
                                 make_point({0.0}), 1e-6, 0, s);
  EXPECT_NEAR(d.point(0), 2.0, 1e-6);
  EXPECT_EQ(d.steps_used, 22u);
  EXPECT_FALSE(d.truncated);
  EXPECT_LE(d.residual_bound, 1e-6);
}

TEST(BackwardSample, BernoulliStaysInAttractor) {
  // Every depth-16 word maps 0 into [-2 (1 - 2^-16), 2 (1 - 2^-16)], and the
  // extremes are attained; this brute-force range is the oracle.
  const auto mu = presets::bernoulli();
  double lo = INFINITY;
  double hi = -INFINITY;
  for (std::uint32_t word = 0; word < (1u << 16); ++word) {
    double y = 0.0;
    for (int k = 0; k < 16; ++k) {
      y = ifstail::apply(mu.atoms()[(word >> k) & 1u].map, make_point({y}))(0);
    }
    lo = std::min(lo, y);
    hi = std::max(hi, y);
  }
  EXPECT_NEAR(hi, 2.0 * (1.0 - std::ldexp(1.0, -16)), 1e-15);
  EXPECT_NEAR(lo, -hi, 1e-15);

  const double tol = 1e-8;
  const auto set = sample_batch(mu, make_point({0.0}), tol, 20'000, 0, 5);
  for (const auto &d : set.draws) {
    ASSERT_LE(std::abs(d.point(0)), 2.0 + tol);
  }
}

TEST(BackwardSample, StartIndependence) {
  const auto mu = presets::prime_q(5);
  for (std::uint64_t i = 0; i < 2000; ++i) {
    Stream a(77, i);
    Stream b(77, i);
    const auto da = backward_sample(mu, make_point({0.0}), 1e-6, 0, a);
    const auto db = backward_sample(mu, make_point({100.0}), 1e-6, 0, b);
    // The shorter word's contraction bounds how far apart the starts can
    // still be felt.
    const double r = std::exp(std::min(
        std::log(da.residual_bound) - std::log(displacement_bound(mu, make_point({0.0}))),
        std::log(db.residual_bound) - std::log(displacement_bound(mu, make_point({100.0})))));
    EXPECT_LE(std::abs(da.point(0) - db.point(0)), r * 100.0 + 2e-6) << i;
  }
}

TEST(BackwardSample, NonContractingRejected) {
  Stream s(1, 0);
  try {
    backward_sample(presets::shear_matrix(), Point::Zero(2), 1e-6, 0, s);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::NonContracting);
  }
  EXPECT_THROW(backward_sample(presets::sequence_example(), make_point({0.0}),
                               1e-6, 0, s),
               Error);
}

TEST(BackwardSample, TruncationIsFlagged) {
  const auto set = sample_batch(presets::prime_q(5), make_point({0.0}), 1e-8,
                                500, 5, 3);
  EXPECT_GT(set.truncated_fraction(), 0.5);
  EXPECT_FALSE(set.valid());
  for (const auto &d : set.draws) {
    EXPECT_GE(d.residual_bound, 0.0);
    EXPECT_LE(d.steps_used, 5u);
    if (!d.truncated) {
      EXPECT_LE(d.residual_bound, 1e-8);
    }
  }
}

TEST(SampleBatch, EmptyBatchIsValid) {
  const auto set =
      sample_batch(presets::prime_q(5), make_point({0.0}), 1e-6, 0, 0, 1);
  EXPECT_TRUE(set.empty());
  EXPECT_TRUE(set.valid());
}

TEST(SampleBatch, DegenerateMeasures) {
  const auto one = sample_batch(presets::single_contraction(),
                                make_point({0.0}), 1e-6, 100, 0, 1);
  for (const auto &d : one.draws) EXPECT_NEAR(d.point(0), 2.0, 1e-6);

  for (double x : {0.0, 0.5, 2.5}) {
    const auto spikes = sample_batch(presets::sequence_example(),
                                     make_point({x}), 1e-8, 1000, 0, 2);
    for (const auto &d : spikes.draws) ASSERT_EQ(d.point(0), 0.0) << x;
    EXPECT_GT(spikes.dropped_mass, 0.0);
    EXPECT_LE(spikes.dropped_mass, 6.0 / (M_PI * M_PI) / 1e4);
  }
}

TEST(SampleBatch, DeterministicAcrossThreadCounts) {
  const auto mu = presets::prime_q(5);
  const auto a = sample_batch(mu, make_point({0.0}), 1e-8, 3000, 0, 42, {1, 1e-3});
  const auto b = sample_batch(mu, make_point({0.0}), 1e-8, 3000, 0, 42, {4, 1e-3});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.draws[i].point, b.draws[i].point);
    EXPECT_EQ(a.draws[i].steps_used, b.draws[i].steps_used);
  }
  const auto c = sample_batch(mu, make_point({0.0}), 1e-8, 3000, 0, 43);
  EXPECT_NE(first_coords(a), first_coords(c));
  EXPECT_EQ(a.measure_id, mu.content_hash());
}

TEST(SampleBatch, BernoulliIsUniform) {
  const auto set =
      sample_batch(presets::bernoulli(), make_point({0.0}), 1e-8, 100'000, 0, 8);
  EXPECT_LE(ks_uniform(first_coords(set)), 0.01);
}

TEST(SampleBatch, TwoDimensionalAffineSystem) {
  Matrix a(2, 2);
  a << 0.5, 0.3, -0.2, 0.4;
  const GeneratingMeasure mu({{AffineMap(a, make_point({1.0, 0.0})), 0.5},
                              {AffineMap(-a, make_point({0.0, 1.0})), 0.5}});
  const auto set = sample_batch(mu, Point::Zero(2), 1e-9, 2000, 0, 4);
  EXPECT_TRUE(set.valid());
  EXPECT_EQ(set.dimension(), 2u);
  // Stationarity of the mean: m = E[A_i] m + E[b_i] = (0.5, 0.5) since
  // E[A_i] = 0.
  Point mean = Point::Zero(2);
  for (const auto &d : set.draws) mean += d.point;
  mean /= static_cast<double>(set.size());
  EXPECT_NEAR(mean(0), 0.5, 0.05);
  EXPECT_NEAR(mean(1), 0.5, 0.05);
}

TEST(ForwardOrbit, Examples) {
  Stream s(1, 0);
  EXPECT_EQ(forward_orbit(presets::prime_q(5), make_point({3.0}), 0, s)(0), 3.0);
  EXPECT_DOUBLE_EQ(
      forward_orbit(presets::single_contraction(), make_point({0.0}), 5, s)(0),
      1.9375);
}

TEST(ForwardOrbit, MarginalMatchesBackwardWord) {
  const auto mu = presets::bernoulli();
  std::vector<double> forward;
  std::vector<double> backward;
  for (std::size_t i = 0; i < 10'000; ++i) {
    Stream f(derive_seed(3, StreamDomain::Forward), i);
    Stream b(derive_seed(3, StreamDomain::Backward), i);
    forward.push_back(forward_orbit(mu, make_point({0.0}), 40, f)(0));
    backward.push_back(backward_partial(mu, make_point({0.0}), 40, b)(0));
  }
  EXPECT_LE(ks_distance(forward, backward), 0.03);
}

TEST(SamplesCsv, HeaderAndRows) {
  const auto set = sample_batch(presets::single_contraction(),
                                make_point({0.0}), 1e-3, 2, 0, 1);
  std::ostringstream out;
  write_samples_csv(out, set);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "index,coord_0,steps_used,residual_bound,truncated");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  EXPECT_NE(text.find("\n0,"), std::string::npos);
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(format_real(INFINITY), "inf");
}

TEST(SampleSet, FromPointsChecksDimensions) {
  std::vector<Point> pts = {make_point({1.0}), make_point({1.0, 2.0})};
  EXPECT_THROW(SampleSet::from_points(pts), Error);
}

TEST(PushForward, SingleContractionFixesItsPoint) {
  const auto set = SampleSet::from_points({make_point({2.0}), make_point({0.0})});
  const auto pushed = push_forward(presets::single_contraction(), set, 1);
  EXPECT_EQ(pushed.draws[0].point(0), 2.0);
  EXPECT_EQ(pushed.draws[1].point(0), 1.0);
  EXPECT_EQ(pushed.size(), 2u);
}

TEST(PushForward, PrimeQIsStationary) {
  const auto mu = presets::prime_q(5);
  const auto set = sample_batch(mu, make_point({0.0}), 1e-8, 100'000, 0, 21);
  const auto pushed = push_forward(mu, set, 22);
  EXPECT_LE(ks_distance(first_coords(set), first_coords(pushed)), 0.01);
  // A push by the wrong measure is visibly not stationary.
  const auto skewed = push_forward(presets::bernoulli(), set, 22);
  EXPECT_GT(ks_distance(first_coords(set), first_coords(skewed)), 0.05);
}

TEST(SampleBatch, StartsAgreeInLaw) {
  const auto mu = presets::prime_q(5);
  const auto a = sample_batch(mu, make_point({0.0}), 1e-8, 100'000, 0, 31);
  const auto b = sample_batch(mu, make_point({100.0}), 1e-8, 100'000, 0, 32);
  EXPECT_LE(ks_distance(first_coords(a), first_coords(b)), 0.01);
}
