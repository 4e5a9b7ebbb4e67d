#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "luxen/compiler.hpp"
#include "luxen/frame.hpp"

namespace luxen {

/// One column of plot-ready output: numbers or labels.
struct VisColumn {
  std::string name;
  std::variant<std::vector<double>, std::vector<std::string>> values;

  std::size_t size() const noexcept {
    return std::visit([](const auto& v) { return v.size(); }, values);
  }
  bool numeric() const noexcept { return values.index() == 0; }
  const std::vector<double>& numbers() const { return std::get<0>(values); }
  const std::vector<std::string>& labels() const { return std::get<1>(values); }

  bool operator==(const VisColumn&) const = default;
};

/// Small table behind one chart, plus the number of source rows consumed.
struct VisData {
  std::vector<VisColumn> columns;
  std::size_t source_rows = 0;

  std::size_t rows() const noexcept { return columns.empty() ? 0 : columns.front().size(); }
  bool empty() const noexcept { return rows() == 0; }
  const VisColumn* find(std::string_view name) const noexcept;

  bool operator==(const VisData&) const = default;
};

struct Vis {
  CompiledVisSpec spec;
  std::uint64_t frame_version = 0;
  std::optional<VisData> data;
  std::optional<double> score;
  bool approximate = false;
  double rank_hint = 0;  // secondary ordering key (cardinality for unscored actions)
  std::size_t candidate = 0;  // position in the generating action's search space
};

/// Output column holding row counts.
inline constexpr const char* kCountField = "count";
/// Suffix of the column holding a bin's upper boundary.
inline constexpr const char* kBinEndSuffix = "_end";

/// Applies filters, drops nulls in referenced columns, then bins, groups or
/// projects per mark. `within` restricts the source rows (e.g. a sample).
VisData process_vis(const CompiledVisSpec& spec, const FrameData& data, const std::vector<std::uint32_t>* within = nullptr);

/// Post-filter rows where every referenced column is non-null.
std::vector<std::uint32_t> vis_rows(const CompiledVisSpec& spec, const FrameData& data,
                                    const std::vector<std::uint32_t>* within = nullptr);

/// Bin index for value v over [lo, hi] with `bins` equal-width bins: right-open
/// except the last, which is closed. Values outside the extent are clamped.
int bin_index(double v, double lo, double hi, int bins) noexcept;

/// Group label of a cell for a dimension encoding (time bucket for temporal).
std::string dimension_label(const Column& column, std::size_t row, const Encoding& enc);

/// Cost model: n × mark weight + 0.5·n per filter.
double mark_weight(Mark mark) noexcept;
double estimate_vis_cost(const CompiledVisSpec& spec, std::size_t rows);

}  // namespace luxen
