#pragma once

// Lipschitz self-maps of R^d: affine maps, similarities and continuous
// piecewise-linear maps of the line, with exact Lipschitz constants.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ifstail/error.hpp"
#include "ifstail/linalg.hpp"

namespace ifstail {

inline constexpr std::size_t kDefaultKnotCap = 1'000'000;
inline constexpr double kOrthogonalityTolerance = 1e-10;
inline constexpr double kFixedPointConditionLimit = 1e12;

inline Point make_point(std::initializer_list<double> coords) {
  Point p(static_cast<Eigen::Index>(coords.size()));
  Eigen::Index i = 0;
  for (double c : coords) {
    p(i++) = c;
  }
  return p;
}

inline void require_finite(const Point &x, const char *what) {
  require(x.allFinite(), ErrorCode::InvalidArgument,
          std::string(what) + " has a non-finite coordinate");
}

namespace detail {

inline void check_dimension(Eigen::Index d) {
  require(d >= 1 && static_cast<std::size_t>(d) <= kMaxDimension,
          ErrorCode::InvalidArgument,
          "dimension must be in [1, " + std::to_string(kMaxDimension) + "]");
}

}  // namespace detail

/// x -> A x + b.
class AffineMap {
 public:
  AffineMap(Matrix linear, Point translation)
      : linear_(std::move(linear)), translation_(std::move(translation)) {
    detail::check_dimension(linear_.rows());
    require(linear_.rows() == linear_.cols(), ErrorCode::DimensionMismatch,
            "affine map needs a square linear part");
    require(translation_.size() == linear_.rows(),
            ErrorCode::DimensionMismatch,
            "translation length differs from matrix size");
    require(linear_.allFinite() && translation_.allFinite(),
            ErrorCode::InvalidArgument, "affine map has non-finite entries");
  }

  static AffineMap scalar(double slope, double offset) {
    return AffineMap(Matrix::Constant(1, 1, slope),
                     Point::Constant(1, offset));
  }

  const Matrix &linear() const noexcept { return linear_; }
  const Point &translation() const noexcept { return translation_; }
  std::size_t dimension() const noexcept {
    return static_cast<std::size_t>(translation_.size());
  }

  bool operator==(const AffineMap &other) const {
    return linear_ == other.linear_ && translation_ == other.translation_;
  }

 private:
  Matrix linear_;
  Point translation_;
};

/// x -> scale * U x + b with U orthogonal.
class Similarity {
 public:
  Similarity(double scale, Matrix rotation, Point translation)
      : scale_(scale),
        rotation_(std::move(rotation)),
        translation_(std::move(translation)) {
    detail::check_dimension(rotation_.rows());
    require(std::isfinite(scale_) && scale_ > 0.0, ErrorCode::InvalidArgument,
            "similarity scale must be positive and finite");
    require(rotation_.rows() == rotation_.cols(), ErrorCode::DimensionMismatch,
            "rotation must be square");
    require(translation_.size() == rotation_.rows(),
            ErrorCode::DimensionMismatch,
            "translation length differs from rotation size");
    require(rotation_.allFinite() && translation_.allFinite(),
            ErrorCode::InvalidArgument, "similarity has non-finite entries");
    const Matrix defect =
        rotation_.transpose() * rotation_ -
        Matrix::Identity(rotation_.rows(), rotation_.cols());
    require(defect.cwiseAbs().maxCoeff() <= kOrthogonalityTolerance,
            ErrorCode::InvalidArgument, "rotation is not orthogonal");
    linear_ = scale_ * rotation_;
  }

  // 1-D similarity x -> slope x + offset; the sign of slope becomes U.
  static Similarity scalar(double slope, double offset) {
    return Similarity(std::abs(slope),
                      Matrix::Constant(1, 1, slope < 0.0 ? -1.0 : 1.0),
                      Point::Constant(1, offset));
  }

  double scale() const noexcept { return scale_; }
  const Matrix &rotation() const noexcept { return rotation_; }
  const Point &translation() const noexcept { return translation_; }
  const Matrix &linear() const noexcept { return linear_; }
  std::size_t dimension() const noexcept {
    return static_cast<std::size_t>(translation_.size());
  }

  bool operator==(const Similarity &other) const {
    return scale_ == other.scale_ && rotation_ == other.rotation_ &&
           translation_ == other.translation_;
  }

 private:
  double scale_;
  Matrix rotation_;
  Point translation_;
  Matrix linear_;
};

/*
 * Continuous piecewise-linear map of the real line. It interpolates
 * `values` at `knots` and extends with `left_slope` below the first knot and
 * `right_slope` above the last one. Segment 0 is (-inf, knots[0]], segment k
 * is [knots[k-1], knots[k]] and segment knots.size() is [knots.back(), inf).
 */
class PiecewiseLinear1D {
 public:
  PiecewiseLinear1D(std::vector<double> knots, std::vector<double> values,
                    double left_slope, double right_slope)
      : knots_(std::move(knots)),
        values_(std::move(values)),
        left_slope_(left_slope),
        right_slope_(right_slope) {
    require(!knots_.empty(), ErrorCode::InvalidArgument,
            "piecewise map needs at least one knot");
    require(knots_.size() == values_.size(), ErrorCode::InvalidArgument,
            "one value per knot is required");
    require(std::isfinite(left_slope_) && std::isfinite(right_slope_),
            ErrorCode::InvalidArgument, "outer slopes must be finite");
    for (std::size_t i = 0; i < knots_.size(); ++i) {
      require(std::isfinite(knots_[i]) && std::isfinite(values_[i]),
              ErrorCode::InvalidArgument, "knots and values must be finite");
      require(i == 0 || knots_[i] > knots_[i - 1], ErrorCode::InvalidArgument,
              "knots must be strictly increasing");
    }
  }

  static PiecewiseLinear1D from_affine(double slope, double offset) {
    return PiecewiseLinear1D({0.0}, {offset}, slope, slope);
  }

  double operator()(double x) const noexcept {
    if (x <= knots_.front()) {
      return values_.front() + left_slope_ * (x - knots_.front());
    }
    if (x >= knots_.back()) {
      return values_.back() + right_slope_ * (x - knots_.back());
    }
    const auto upper = std::upper_bound(knots_.begin(), knots_.end(), x);
    const std::size_t k = static_cast<std::size_t>(upper - knots_.begin());
    const double x0 = knots_[k - 1];
    const double x1 = knots_[k];
    const double w = (x - x0) / (x1 - x0);
    return values_[k - 1] + w * (values_[k] - values_[k - 1]);
  }

  std::size_t segment_count() const noexcept { return knots_.size() + 1; }

  double segment_slope(std::size_t segment) const noexcept {
    if (segment == 0) {
      return left_slope_;
    }
    if (segment == knots_.size()) {
      return right_slope_;
    }
    return (values_[segment] - values_[segment - 1]) /
           (knots_[segment] - knots_[segment - 1]);
  }

  double max_abs_slope() const noexcept {
    double best = 0.0;
    for (std::size_t s = 0; s < segment_count(); ++s) {
      best = std::max(best, std::abs(segment_slope(s)));
    }
    return best;
  }

  const std::vector<double> &knots() const noexcept { return knots_; }
  const std::vector<double> &values() const noexcept { return values_; }
  double left_slope() const noexcept { return left_slope_; }
  double right_slope() const noexcept { return right_slope_; }

  bool operator==(const PiecewiseLinear1D &other) const = default;

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
  double left_slope_;
  double right_slope_;
};

using LipschitzMap = std::variant<AffineMap, Similarity, PiecewiseLinear1D>;

inline std::size_t dimension(const LipschitzMap &map) {
  return std::visit(
      [](const auto &m) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>,
                                     PiecewiseLinear1D>) {
          return 1;
        } else {
          return m.dimension();
        }
      },
      map);
}

inline bool is_affine(const LipschitzMap &map) noexcept {
  return !std::holds_alternative<PiecewiseLinear1D>(map);
}

inline const Matrix &linear_part(const LipschitzMap &map) {
  if (const auto *a = std::get_if<AffineMap>(&map)) {
    return a->linear();
  }
  if (const auto *s = std::get_if<Similarity>(&map)) {
    return s->linear();
  }
  fail(ErrorCode::InvalidArgument, "piecewise map has no linear part");
}

inline const Point &translation_part(const LipschitzMap &map) {
  if (const auto *a = std::get_if<AffineMap>(&map)) {
    return a->translation();
  }
  if (const auto *s = std::get_if<Similarity>(&map)) {
    return s->translation();
  }
  fail(ErrorCode::InvalidArgument, "piecewise map has no translation part");
}

inline Point apply(const LipschitzMap &map, const Point &x) {
  require(static_cast<std::size_t>(x.size()) == dimension(map),
          ErrorCode::DimensionMismatch,
          "point of dimension " + std::to_string(x.size()) +
              " applied to a map of dimension " +
              std::to_string(dimension(map)));
  if (const auto *pw = std::get_if<PiecewiseLinear1D>(&map)) {
    return Point::Constant(1, (*pw)(x(0)));
  }
  return linear_part(map) * x + translation_part(map);
}

inline double lipschitz_constant(const LipschitzMap &map) {
  if (const auto *s = std::get_if<Similarity>(&map)) {
    return s->scale();
  }
  if (const auto *pw = std::get_if<PiecewiseLinear1D>(&map)) {
    return pw->max_abs_slope();
  }
  return operator_norm(std::get<AffineMap>(map).linear());
}

namespace detail {

inline PiecewiseLinear1D as_piecewise(const LipschitzMap &map) {
  if (const auto *pw = std::get_if<PiecewiseLinear1D>(&map)) {
    return *pw;
  }
  return PiecewiseLinear1D::from_affine(linear_part(map)(0, 0),
                                        translation_part(map)(0));
}

// Slope of g far out in the direction h_slope points: the right tail for a
// positive slope, the left tail for a negative one.
inline double outer_slope(const PiecewiseLinear1D &g, double h_slope) {
  if (h_slope > 0.0) {
    return g.right_slope();
  }
  if (h_slope < 0.0) {
    return g.left_slope();
  }
  return 0.0;
}

// g o h. The knot set of the result is the knots of h together with every
// preimage under h of a knot of g.
inline PiecewiseLinear1D compose_piecewise(const PiecewiseLinear1D &g,
                                           const PiecewiseLinear1D &h,
                                           std::size_t knot_cap) {
  const auto &hk = h.knots();
  const auto &gk = g.knots();
  std::vector<double> merged(hk.begin(), hk.end());

  for (std::size_t s = 0; s < h.segment_count(); ++s) {
    const double slope = h.segment_slope(s);
    if (slope == 0.0) {
      continue;
    }
    const double anchor = s == 0 ? hk.front() : hk[s - 1];
    const double anchor_value = h(anchor);
    double lo = -INFINITY;
    double hi = INFINITY;
    if (s > 0) lo = hk[s - 1];
    if (s < hk.size()) hi = hk[s];
    const double y_lo = std::isfinite(lo) ? h(lo) : (slope > 0 ? -INFINITY : INFINITY);
    const double y_hi = std::isfinite(hi) ? h(hi) : (slope > 0 ? INFINITY : -INFINITY);
    const double range_lo = std::min(y_lo, y_hi);
    const double range_hi = std::max(y_lo, y_hi);
    auto first = std::lower_bound(gk.begin(), gk.end(), range_lo);
    auto last = std::upper_bound(gk.begin(), gk.end(), range_hi);
    for (auto it = first; it != last; ++it) {
      const double x = anchor + (*it - anchor_value) / slope;
      merged.push_back(std::clamp(x, lo, hi));
      require(merged.size() <= knot_cap, ErrorCode::KnotOverflow,
              "composition exceeds the knot cap of " +
                  std::to_string(knot_cap));
    }
  }

  // Preimages that land within rounding distance of an existing knot would
  // create sliver segments with meaningless slopes.
  std::sort(merged.begin(), merged.end());
  std::vector<double> kept;
  kept.reserve(merged.size());
  for (double x : merged) {
    if (kept.empty() ||
        x - kept.back() > 1e-12 * std::max(1.0, std::abs(x))) {
      kept.push_back(x);
    }
  }
  merged = std::move(kept);
  require(merged.size() <= knot_cap, ErrorCode::KnotOverflow,
          "composition exceeds the knot cap of " + std::to_string(knot_cap));

  std::vector<double> values;
  values.reserve(merged.size());
  for (double x : merged) {
    values.push_back(g(h(x)));
  }
  const double left = h.left_slope() * outer_slope(g, -h.left_slope());
  const double right = h.right_slope() * outer_slope(g, h.right_slope());
  return PiecewiseLinear1D(std::move(merged), std::move(values), left, right);
}

}  // namespace detail

/// g o h, i.e. x -> g(h(x)).
inline LipschitzMap compose(const LipschitzMap &g, const LipschitzMap &h,
                            std::size_t knot_cap = kDefaultKnotCap) {
  require(dimension(g) == dimension(h), ErrorCode::DimensionMismatch,
          "cannot compose maps of different dimensions");
  if (!is_affine(g) || !is_affine(h)) {
    return detail::compose_piecewise(detail::as_piecewise(g),
                                     detail::as_piecewise(h), knot_cap);
  }
  const auto *sg = std::get_if<Similarity>(&g);
  const auto *sh = std::get_if<Similarity>(&h);
  if (sg != nullptr && sh != nullptr) {
    return Similarity(sg->scale() * sh->scale(),
                      sg->rotation() * sh->rotation(),
                      sg->linear() * sh->translation() + sg->translation());
  }
  return AffineMap(linear_part(g) * linear_part(h),
                   linear_part(g) * translation_part(h) + translation_part(g));
}

/// Unique solution of g(x) = x for an affine map or similarity.
inline Point fixed_point(const LipschitzMap &map) {
  require(is_affine(map), ErrorCode::InvalidArgument,
          "fixed_point needs an affine map or similarity");
  const Matrix &a = linear_part(map);
  const Point &b = translation_part(map);
  const Matrix system = Matrix::Identity(a.rows(), a.cols()) - a;
  Eigen::JacobiSVD<Matrix> svd(system,
                               Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto &sv = svd.singularValues();
  const double smallest = sv.minCoeff();
  const double largest = sv.maxCoeff();
  require(smallest > 0.0 && largest / smallest <= kFixedPointConditionLimit,
          ErrorCode::SingularSystem,
          "I - A is numerically singular; the map has no unique fixed point");
  Point x = svd.solve(b);
  const double residual = (ifstail::apply(map, x) - x).norm();
  require(residual <= 1e-9 * (1.0 + x.norm()), ErrorCode::NonConvergence,
          "fixed point residual too large");
  return x;
}

}  // namespace ifstail
