#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "luxen/clause.hpp"
#include "luxen/metadata.hpp"
#include "luxen/transform.hpp"

namespace luxen {

// ---------------------------------------------------------------------------
// Validation

struct IntentWarning {
  std::size_t clause = 0;
  std::string kind;  // "unknown-attribute", "unknown-value", "empty-wildcard"
  std::string message;
  std::optional<std::string> suggestion;
};

/// Raised when no clause of an intent can be resolved against the frame.
class IntentError : public InvalidArgument {
 public:
  IntentError(const std::string& message, std::vector<IntentWarning> warnings)
      : InvalidArgument(message), warnings_(std::move(warnings)) {}
  const std::vector<IntentWarning>& warnings() const noexcept { return warnings_; }

 private:
  std::vector<IntentWarning> warnings_;
};

/// Case-insensitive edit distance.
std::size_t levenshtein(std::string_view a, std::string_view b);

/// Closest column name within `max_distance`; ties resolve lexicographically.
std::optional<std::string> suggest_column(std::string_view name, const MetadataSet& meta, std::size_t max_distance = 3);

/// Checks names and filter values against the metadata without changing the
/// intent. Throws IntentError when no clause is resolvable.
std::vector<IntentWarning> validate_intent(const IntentSpec& intent, const MetadataSet& meta);

// ---------------------------------------------------------------------------
// Partial and compiled specifications

struct AxisSpec {
  std::string attribute;
  std::optional<Channel> channel;
  std::optional<Aggregation> aggregation;
  std::optional<int> bin_size;
  std::optional<SemanticType> type;  // filled by lookup_defaults

  bool operator==(const AxisSpec&) const = default;
};

/// A fully enumerated visualization request: no unions, no wildcards.
struct PartialVisSpec {
  std::vector<AxisSpec> axes;
  std::vector<Comparison> filters;

  bool operator==(const PartialVisSpec&) const = default;
};

inline constexpr std::size_t kMaxAxes = 3;

/// Cross-product of clause alternatives, with repeated-attribute, >3-axis and
/// symmetric duplicates removed. Unknown names contribute no alternatives.
std::vector<PartialVisSpec> expand_intent(const IntentSpec& intent, const MetadataSet& meta);

/// Attaches semantic types; returns nullopt (with a diagnostic) for invalid specs.
std::optional<PartialVisSpec> lookup_defaults(const PartialVisSpec& partial, const MetadataSet& meta,
                                              std::vector<std::string>* diagnostics = nullptr);

enum class Mark { scatter, color_scatter, bar, color_bar, line, color_line, histogram, heatmap, color_heatmap, map };
enum class TimeUnit { year, month, day };
enum class StructureKind { none, row_wise, column_wise };

std::string_view to_string(Mark m) noexcept;
std::string_view to_string(TimeUnit u) noexcept;

/// One channel assignment. An empty field with aggregate=count is a row count.
struct Encoding {
  std::string field;
  SemanticType type = SemanticType::quantitative;
  Aggregation aggregate = Aggregation::none;
  std::optional<int> bins;
  std::optional<std::pair<double, double>> extent;
  std::optional<TimeUnit> time_unit;
  bool explicit_aggregate = false;

  bool is_count() const noexcept { return field.empty() && aggregate == Aggregation::count; }
  bool is_measure() const noexcept { return aggregate != Aggregation::none; }
  bool operator==(const Encoding&) const = default;
};

struct CompiledVisSpec {
  Mark mark = Mark::bar;
  std::optional<Encoding> x, y, color;
  std::vector<Comparison> filters;
  bool sort_descending = false;
  std::optional<std::size_t> top_categories;
  StructureKind structure = StructureKind::none;
  std::size_t structure_row = 0;  // row-wise: source row
  std::string structure_label;    // row label or column name

  /// Referenced data columns in channel order x, y, color (count omitted).
  std::vector<std::string> attributes() const;
  /// Attributes followed by `attr op value` filter strings; used for tie-breaks.
  std::vector<std::string> sort_key() const;
  std::string title() const;

  bool operator==(const CompiledVisSpec&) const = default;
};

struct EncodingOptions {
  std::size_t scatter_row_limit = 5000;
  int histogram_bins = 10;
  int heatmap_bins = 40;
  std::size_t top_categories = 15;
};

/// Rule-table mark and channel assignment. Explicit channel, aggregation and
/// bin size on the partial take precedence over the defaults.
CompiledVisSpec infer_encoding(const PartialVisSpec& partial, const MetadataSet& meta, std::size_t row_count,
                               const EncodingOptions& options = {});

/// expand → lookup → infer for every alternative.
std::vector<CompiledVisSpec> compile_intent(const IntentSpec& intent, const MetadataSet& meta,
                                            std::vector<std::string>* diagnostics = nullptr,
                                            const EncodingOptions& options = {});

/// Coarsest of year/month/day with at least two distinct values in [lo, hi].
TimeUnit temporal_unit(double lo_seconds, double hi_seconds);
std::string time_bucket(DateTime t, TimeUnit unit);
/// Numeric [min, max] for a temporal column (parsing string storage if needed).
std::optional<std::pair<double, double>> temporal_extent(const ColumnMetadata& meta);

}  // namespace luxen
