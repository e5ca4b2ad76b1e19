#pragma once

// Named generating measures.

#include <cstdint>
#include <string>
#include <vector>

#include "ifstail/error.hpp"
#include "ifstail/generating_measure.hpp"
#include "ifstail/metric_maps.hpp"

namespace ifstail::presets {

inline bool is_prime(std::uint64_t q) noexcept {
  if (q < 2) return false;
  for (std::uint64_t d = 2; d * d <= q; ++d) {
    if (q % d == 0) return false;
  }
  return true;
}

/// 1/3 on q/(q-1) x + 1, 2/3 on q/(q+3) x - 1.
inline GeneratingMeasure prime_q(std::int64_t q) {
  require(q >= 5, ErrorCode::InvalidArgument,
          "prime_q needs q >= 5 (got " + std::to_string(q) + ")");
  const double qq = static_cast<double>(q);
  return GeneratingMeasure({
      {Similarity::scalar(qq / (qq - 1.0), 1.0), 1.0 / 3.0},
      {Similarity::scalar(qq / (qq + 3.0), -1.0), 2.0 / 3.0},
  });
}

/// Point mass on the shear [[1, 1], [0, 1]].
inline GeneratingMeasure shear_matrix() {
  Matrix a(2, 2);
  a << 1.0, 1.0, 0.0, 1.0;
  return GeneratingMeasure({{AffineMap(a, Point::Zero(2)), 1.0}});
}

/// 1/2 on x/2 - 1, 1/2 on x/2 + 1; stationary measure uniform on [-2, 2].
inline GeneratingMeasure bernoulli() {
  return GeneratingMeasure({
      {Similarity::scalar(0.5, -1.0), 0.5},
      {Similarity::scalar(0.5, 1.0), 0.5},
  });
}

/// Point mass on x/2 + 1; stationary measure delta_2.
inline GeneratingMeasure single_contraction() {
  return GeneratingMeasure({{Similarity::scalar(0.5, 1.0), 1.0}});
}

/// 1/2 on x/2 + 1, 1/2 on -x.
inline GeneratingMeasure compact_flip() {
  return GeneratingMeasure({
      {Similarity::scalar(0.5, 1.0), 0.5},
      {Similarity::scalar(-1.0, 0.0), 0.5},
  });
}

/// 1/2 on x/2 + 1, 1/2 on x + 1.
inline GeneratingMeasure noncompact_translation() {
  return GeneratingMeasure({
      {Similarity::scalar(0.5, 1.0), 0.5},
      {Similarity::scalar(1.0, 1.0), 0.5},
  });
}

inline constexpr std::size_t kMinSequenceTruncation = 10;

/// The countable spike family, materialized up to atom N.
inline GeneratingMeasure sequence_example(std::size_t truncation = 10'000) {
  require(truncation >= kMinSequenceTruncation &&
              truncation <= SpikeSequence::kMaxTruncation,
          ErrorCode::InvalidArgument,
          "sequence_example truncation must lie in [10, 20000]");
  std::vector<Atom> atoms;
  atoms.reserve(truncation);
  for (std::uint64_t n = 1; n <= truncation; ++n) {
    atoms.push_back({SpikeSequence::map(n), SpikeSequence::weight(n)});
  }
  return GeneratingMeasure(std::move(atoms), SpikeSequence{truncation});
}

}  // namespace ifstail::presets
