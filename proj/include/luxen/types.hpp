#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace luxen {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (CSV, clause syntax). Carries the offending position.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : Error(message + " (at position " + std::to_string(position) + ")"),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// A referenced column does not exist.
class ColumnNotFound : public Error {
 public:
  explicit ColumnNotFound(const std::string& column)
      : Error("unknown column '" + column + "'"), column_(column) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

/// Semantically invalid request (bad transform, unresolvable intent, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

enum class StorageType { integer, floating, string, boolean, datetime };
enum class SemanticType { nominal, quantitative, temporal, geographic };

std::string_view to_string(StorageType t) noexcept;
std::string_view to_string(SemanticType t) noexcept;
std::optional<SemanticType> parse_semantic_type(std::string_view text) noexcept;

/// Seconds since the Unix epoch, UTC.
struct DateTime {
  std::int64_t seconds = 0;
  auto operator<=>(const DateTime&) const = default;
};

/// A single nullable cell value.
using Cell = std::variant<std::monostate, std::int64_t, double, std::string, bool, DateTime>;

inline bool is_null(const Cell& c) noexcept { return std::holds_alternative<std::monostate>(c); }

/// Total order used for sorting group keys and unique values. Numbers compare
/// numerically across integer/float; otherwise values order by kind first.
std::strong_ordering compare_cells(const Cell& a, const Cell& b);

/// Text rendering used in tables, labels and spec documents.
std::string format_cell(const Cell& c);

// ISO-8601 dates: YYYY-MM-DD, optionally followed by 'T' or ' ' and HH:MM[:SS], optional 'Z'.
std::optional<DateTime> parse_iso_datetime(std::string_view text) noexcept;
std::string format_datetime(DateTime t);

std::optional<std::int64_t> parse_int(std::string_view text) noexcept;
std::optional<double> parse_double(std::string_view text) noexcept;
std::optional<bool> parse_bool(std::string_view text) noexcept;

std::string_view trim(std::string_view s) noexcept;
std::string to_lower(std::string_view s);

struct CivilDate {
  int year;
  unsigned month;
  unsigned day;
};
CivilDate civil_from(DateTime t) noexcept;

}  // namespace luxen
