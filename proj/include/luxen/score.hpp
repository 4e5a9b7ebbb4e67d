#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "luxen/compiler.hpp"
#include "luxen/frame.hpp"

namespace luxen {

/// Sample Pearson r over pairwise-complete entries (NaN marks a null).
/// Undefined for fewer than two pairs or zero variance. Clamped to [-1, 1].
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Adjusted Fisher-Pearson skewness G1 (NaN entries ignored). Undefined for
/// fewer than three values or zero variance.
std::optional<double> skewness(std::span<const double> x);

double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// Scales non-negative weights to sum 1 (all zeros stay zeros).
std::vector<double> normalize(std::vector<double> weights);

/// Distance of normalized |values| from the uniform distribution.
double deviation_from_uniform(std::span<const double> values);

/// Pearson of two frame columns over `rows` (all rows when null).
std::optional<double> pearson_columns(const Column& a, const Column& b, const std::vector<std::uint32_t>* rows);
std::optional<double> skewness_column(const Column& a, const std::vector<std::uint32_t>* rows);

enum class ScoreKind { correlation, distribution, occurrence, temporal, geographic, enhance, filter, none };
std::string_view to_string(ScoreKind k) noexcept;

struct ScoreContext {
  ScoreKind kind = ScoreKind::none;
  const CompiledVisSpec* base = nullptr;  // Enhance / Filter: the intent's spec
  std::string added;                      // Enhance: the added attribute
  const MetadataSet* meta = nullptr;
};

/// Interestingness of a spec against frame contents, restricted to `within`
/// when given. Correlation keeps undefined scores undefined (ranked last);
/// every other kind maps undefined inputs to 0.
std::optional<double> interestingness(const CompiledVisSpec& spec, const FrameData& data, const ScoreContext& ctx,
                                      const std::vector<std::uint32_t>* within = nullptr);

}  // namespace luxen
