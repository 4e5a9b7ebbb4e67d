#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "luxen/column.hpp"

namespace luxen {

/// At most this many distinct values are retained per column; cardinality stays exact.
inline constexpr std::size_t kUniqueValueCap = 1000;
/// Integers with at most this many distinct values are nominal.
inline constexpr std::size_t kNominalCardinality = 40;

struct ColumnMetadata {
  std::string name;
  StorageType storage = StorageType::string;
  std::vector<Cell> unique_values;  // sorted ascending, at most kUniqueValueCap
  std::size_t cardinality = 0;
  bool capped = false;  // cardinality > kUniqueValueCap
  std::optional<double> min;
  std::optional<double> max;
  bool all_null = false;
  SemanticType semantic = SemanticType::nominal;
  bool overridden = false;

  bool operator==(const ColumnMetadata&) const = default;
};

/// Metadata for every column of one frame version, in column order.
struct MetadataSet {
  std::uint64_t version = 0;
  std::size_t rows = 0;
  std::vector<ColumnMetadata> columns;

  const ColumnMetadata* find(std::string_view name) const noexcept;
  const ColumnMetadata& at(std::string_view name) const;
};

/// Distinct values, cardinality and extremes of one column. Nulls are excluded.
/// The semantic type is left for infer_semantic_type.
ColumnMetadata describe_column(const Column& column);

/// Rule ladder: override, temporal, geographic, float, integer by cardinality, nominal.
SemanticType infer_semantic_type(const Column& column, const ColumnMetadata& meta, std::size_t row_count);

/// Case-insensitive membership in the bundled country and US-state name lists.
bool is_geographic_name(std::string_view value);
bool is_geographic_column_name(std::string_view name);

}  // namespace luxen
