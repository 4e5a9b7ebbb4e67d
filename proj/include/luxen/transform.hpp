#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "luxen/clause.hpp"
#include "luxen/column.hpp"

namespace luxen {

/// `column op value`, with value parsed according to the column's storage type.
struct Comparison {
  std::string column;
  FilterOp op = FilterOp::eq;
  std::string value;
  bool operator==(const Comparison&) const = default;
};

struct FilterRows { std::vector<Comparison> predicate; };  // conjunction
struct ProjectColumns { std::vector<std::string> columns; };
struct RenameColumns { std::vector<std::pair<std::string, std::string>> mapping; };
/// Either literal values (one per row) or `source <arith> operand`.
struct SetColumn {
  std::string name;
  std::optional<nlohmann::json> values;
  std::string source;
  char arith = '*';
  double operand = 1.0;
};
struct GroupAggregate {
  std::vector<std::string> keys;
  std::vector<std::pair<std::string, Aggregation>> aggregations;
};
struct Pivot {
  std::string index;
  std::string columns;
  std::string values;
  std::optional<Aggregation> aggregation;
};
struct HeadTail { std::size_t n = 5; bool tail = false; };
/// Markers: "dropna", "sort_values:<column>", "touch" (no data change).
struct InplaceModify { std::string marker; };

enum class HistoryKind { load, filter, project, rename, set_column, group_aggregate, pivot, inplace_modify, head_tail };
std::string_view to_string(HistoryKind k) noexcept;

struct Transform {
  std::variant<FilterRows, ProjectColumns, RenameColumns, SetColumn, GroupAggregate, Pivot, HeadTail, InplaceModify> op;
  /// Mutate the frame itself instead of deriving a new one.
  bool inplace = false;

  HistoryKind kind() const noexcept;
};

Transform transform_from_json(const nlohmann::json& j);
nlohmann::json transform_to_json(const Transform& t);

/// Evaluates one comparison against a column; nulls never match.
class RowMatcher {
 public:
  RowMatcher(const Column& column, FilterOp op, std::string_view value);
  bool operator()(std::size_t row) const;

 private:
  const Column* column_;
  FilterOp op_;
  enum class Mode { number, text, never } mode_ = Mode::never;
  double number_ = 0;
  std::string text_;
};

}  // namespace luxen
