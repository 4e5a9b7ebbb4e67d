#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "luxen/frame.hpp"

namespace luxen {

/// Shape of a generated frame. Fractions are normalized before use.
struct SyntheticConfig {
  std::size_t rows = 100000;
  std::size_t cols = 50;
  double quantitative = 0.78;
  double nominal = 0.20;
  double temporal = 0.02;
  std::uint64_t seed = 1;
  /// Quantitative columns per latent factor; columns sharing one are correlated.
  std::size_t factor_group = 5;

  void validate() const;  // throws InvalidArgument
};

struct SyntheticLayout {
  std::size_t quantitative = 0;
  std::size_t nominal = 0;
  std::size_t temporal = 0;
};

/// Column counts per type: Q and T rounded, N takes the remainder.
SyntheticLayout synthetic_layout(const SyntheticConfig& config);

/// Column names: q0.. (even: integer, odd: float), n0.., t0..
/// Nominal n_j has a cardinality on the geometric series from 1 to 10000.
FrameData make_synthetic(const SyntheticConfig& config);
std::shared_ptr<Frame> synthetic_frame(const SyntheticConfig& config);

/// Cardinality of nominal column `j` out of `count`.
std::size_t synthetic_cardinality(std::size_t j, std::size_t count);

}  // namespace luxen
