#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "luxen/types.hpp"

namespace luxen {

enum class ClauseKind { axis, filter };
enum class Channel { x, y, color };
enum class Aggregation { none, mean, sum, count, min, max, variance };
enum class FilterOp { eq, gt, lt, le, ge, ne };

std::string_view to_string(Channel c) noexcept;
std::string_view to_string(Aggregation a) noexcept;
std::string_view to_string(FilterOp op) noexcept;
std::optional<Channel> parse_channel(std::string_view text) noexcept;
std::optional<Aggregation> parse_aggregation(std::string_view text) noexcept;
std::optional<FilterOp> parse_filter_op(std::string_view text) noexcept;

/// Which columns a clause refers to: an explicit union of names, or `?`.
struct AttributeSelector {
  std::vector<std::string> names;
  bool wildcard = false;
  std::optional<SemanticType> constraint;  // only with wildcard

  bool operator==(const AttributeSelector&) const = default;
};

/// Which values a filter compares against: a union of literals, or `?`.
struct ValueSelector {
  std::vector<std::string> values;
  bool wildcard = false;

  bool operator==(const ValueSelector&) const = default;
};

struct ClauseSpec {
  ClauseKind kind = ClauseKind::axis;
  AttributeSelector attribute;
  std::optional<Channel> channel;
  std::optional<Aggregation> aggregation;
  std::optional<int> bin_size;
  std::optional<FilterOp> op;
  ValueSelector value;

  bool operator==(const ClauseSpec&) const = default;
};

struct IntentSpec {
  std::vector<ClauseSpec> clauses;
  bool operator==(const IntentSpec&) const = default;
};

/// Parses the textual clause syntax:
///
///   axis    := NAME ('|' NAME)* [mods] | '?' [mods]
///   filter  := NAME ('|' NAME)* OP VALUE ('|' VALUE)* | NAME OP '?'
///   mods    := '[' key '=' val (',' key '=' val)* ']'
///              keys: channel, aggregation, bin_size, data_type (wildcard only)
///   OP      := = | != | < | > | <= | >=
///
/// Names and values are bare (whitespace-trimmed) or double-quoted.
ClauseSpec parse_clause(std::string_view text);

/// Canonical text form; parse_clause(print_clause(c)) == c.
std::string print_clause(const ClauseSpec& clause);

/// Structured clause input: {"attribute": "A" | ["A","B"] | "?", "channel": ..,
/// "aggregation": .., "bin_size": .., "data_type": .., "filter_op": .., "value": ..}.
/// A JSON string is parsed with parse_clause.
ClauseSpec clause_from_json(const nlohmann::json& j);
nlohmann::json clause_to_json(const ClauseSpec& clause);

/// Splits "A,B=x,C" on top-level commas (quotes and brackets respected) and parses each.
IntentSpec parse_intent_list(std::string_view text);
IntentSpec intent_from_json(const nlohmann::json& j);
nlohmann::json intent_to_json(const IntentSpec& intent);

}  // namespace luxen
