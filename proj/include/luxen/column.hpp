#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "luxen/types.hpp"

namespace luxen {

/// An immutable, typed, nullable column. Integer, boolean and datetime cells
/// live in an int64 buffer; floats in a double buffer; strings in their own.
class Column {
 public:
  Column() = default;

  static Column integers(std::string name, std::vector<std::int64_t> values, std::vector<std::uint8_t> valid = {});
  static Column floats(std::string name, std::vector<double> values, std::vector<std::uint8_t> valid = {});
  static Column strings(std::string name, std::vector<std::string> values, std::vector<std::uint8_t> valid = {});
  static Column booleans(std::string name, std::vector<std::int64_t> values, std::vector<std::uint8_t> valid = {});
  static Column datetimes(std::string name, std::vector<std::int64_t> seconds, std::vector<std::uint8_t> valid = {});
  /// Builds a column from cells; all non-null cells must share `type`.
  static Column from_cells(std::string name, StorageType type, const std::vector<Cell>& cells);

  const std::string& name() const noexcept { return name_; }
  StorageType type() const noexcept { return type_; }
  std::size_t size() const noexcept { return valid_.size(); }
  std::size_t null_count() const noexcept { return nulls_; }

  bool is_null(std::size_t row) const noexcept { return valid_[row] == 0; }
  bool is_numeric() const noexcept {
    return type_ == StorageType::integer || type_ == StorageType::floating ||
           type_ == StorageType::datetime || type_ == StorageType::boolean;
  }

  Cell cell(std::size_t row) const;
  std::string format(std::size_t row) const;
  /// Numeric view of a cell. Only meaningful for numeric storage.
  double number(std::size_t row) const noexcept {
    return type_ == StorageType::floating ? floats_[row] : static_cast<double>(ints_[row]);
  }
  const std::string& text(std::size_t row) const noexcept { return strings_[row]; }

  std::span<const std::int64_t> int_data() const noexcept { return ints_; }
  std::span<const double> float_data() const noexcept { return floats_; }
  std::span<const std::string> string_data() const noexcept { return strings_; }
  std::span<const std::uint8_t> validity() const noexcept { return valid_; }

  Column renamed(std::string name) const;
  Column take(std::span<const std::uint32_t> rows) const;

  bool operator==(const Column&) const = default;

 private:
  std::string name_;
  StorageType type_ = StorageType::string;
  std::vector<std::int64_t> ints_;
  std::vector<double> floats_;
  std::vector<std::string> strings_;
  std::vector<std::uint8_t> valid_;
  std::size_t nulls_ = 0;

  void finish(std::size_t n, std::vector<std::uint8_t> valid);
};

/// Calls `fn` with the column's numeric buffer (span of int64 or double).
template <class Fn>
decltype(auto) with_numeric(const Column& col, Fn&& fn) {
  if (col.type() == StorageType::floating) return fn(col.float_data());
  return fn(col.int_data());
}

}  // namespace luxen
