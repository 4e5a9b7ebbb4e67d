#include "luxen/column.hpp"

#include <algorithm>

namespace luxen {

void Column::finish(std::size_t n, std::vector<std::uint8_t> valid) {
  if (valid.empty()) valid.assign(n, 1);
  if (valid.size() != n) throw InvalidArgument("column '" + name_ + "': validity length mismatch");
  valid_ = std::move(valid);
  nulls_ = static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), std::uint8_t{0}));
}

Column Column::integers(std::string name, std::vector<std::int64_t> values, std::vector<std::uint8_t> valid) {
  Column c;
  c.name_ = std::move(name);
  c.type_ = StorageType::integer;
  auto n = values.size();
  c.ints_ = std::move(values);
  c.finish(n, std::move(valid));
  return c;
}

Column Column::floats(std::string name, std::vector<double> values, std::vector<std::uint8_t> valid) {
  Column c;
  c.name_ = std::move(name);
  c.type_ = StorageType::floating;
  auto n = values.size();
  c.floats_ = std::move(values);
  c.finish(n, std::move(valid));
  return c;
}

Column Column::strings(std::string name, std::vector<std::string> values, std::vector<std::uint8_t> valid) {
  Column c;
  c.name_ = std::move(name);
  c.type_ = StorageType::string;
  auto n = values.size();
  c.strings_ = std::move(values);
  c.finish(n, std::move(valid));
  return c;
}

Column Column::booleans(std::string name, std::vector<std::int64_t> values, std::vector<std::uint8_t> valid) {
  Column c = integers(std::move(name), std::move(values), std::move(valid));
  c.type_ = StorageType::boolean;
  return c;
}

Column Column::datetimes(std::string name, std::vector<std::int64_t> seconds, std::vector<std::uint8_t> valid) {
  Column c = integers(std::move(name), std::move(seconds), std::move(valid));
  c.type_ = StorageType::datetime;
  return c;
}

Column Column::from_cells(std::string name, StorageType type, const std::vector<Cell>& cells) {
  std::vector<std::uint8_t> valid(cells.size(), 1);
  auto mismatch = [&](std::size_t i) {
    return InvalidArgument("column '" + name + "': cell " + std::to_string(i) + " is not of type " +
                           std::string(to_string(type)));
  };
  switch (type) {
    case StorageType::floating: {
      std::vector<double> v(cells.size(), 0.0);
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (luxen::is_null(cells[i])) { valid[i] = 0; continue; }
        if (auto* d = std::get_if<double>(&cells[i])) v[i] = *d;
        else if (auto* n = std::get_if<std::int64_t>(&cells[i])) v[i] = static_cast<double>(*n);
        else throw mismatch(i);
      }
      return floats(std::move(name), std::move(v), std::move(valid));
    }
    case StorageType::string: {
      std::vector<std::string> v(cells.size());
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (luxen::is_null(cells[i])) { valid[i] = 0; continue; }
        auto* s = std::get_if<std::string>(&cells[i]);
        if (!s) throw mismatch(i);
        v[i] = *s;
      }
      return strings(std::move(name), std::move(v), std::move(valid));
    }
    default: {
      std::vector<std::int64_t> v(cells.size(), 0);
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (luxen::is_null(cells[i])) { valid[i] = 0; continue; }
        if (type == StorageType::integer) {
          auto* n = std::get_if<std::int64_t>(&cells[i]);
          if (!n) throw mismatch(i);
          v[i] = *n;
        } else if (type == StorageType::boolean) {
          auto* b = std::get_if<bool>(&cells[i]);
          if (!b) throw mismatch(i);
          v[i] = *b ? 1 : 0;
        } else {
          auto* t = std::get_if<DateTime>(&cells[i]);
          if (!t) throw mismatch(i);
          v[i] = t->seconds;
        }
      }
      Column c = integers(std::move(name), std::move(v), std::move(valid));
      c.type_ = type;
      return c;
    }
  }
}

Cell Column::cell(std::size_t row) const {
  if (is_null(row)) return std::monostate{};
  switch (type_) {
    case StorageType::integer: return ints_[row];
    case StorageType::floating: return floats_[row];
    case StorageType::string: return strings_[row];
    case StorageType::boolean: return ints_[row] != 0;
    case StorageType::datetime: return DateTime{ints_[row]};
  }
  return std::monostate{};
}

std::string Column::format(std::size_t row) const {
  if (is_null(row)) return "";
  if (type_ == StorageType::string) return strings_[row];
  return format_cell(cell(row));
}

Column Column::renamed(std::string name) const {
  Column c = *this;
  c.name_ = std::move(name);
  return c;
}

Column Column::take(std::span<const std::uint32_t> rows) const {
  Column c;
  c.name_ = name_;
  c.type_ = type_;
  std::vector<std::uint8_t> valid(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) valid[i] = valid_[rows[i]];
  switch (type_) {
    case StorageType::floating:
      c.floats_.resize(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) c.floats_[i] = floats_[rows[i]];
      break;
    case StorageType::string:
      c.strings_.resize(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) c.strings_[i] = strings_[rows[i]];
      break;
    default:
      c.ints_.resize(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) c.ints_[i] = ints_[rows[i]];
      break;
  }
  c.finish(rows.size(), std::move(valid));
  return c;
}

}  // namespace luxen
