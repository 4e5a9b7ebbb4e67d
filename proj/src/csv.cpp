#include "luxen/csv.hpp"

#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace luxen {

namespace {

struct RawTable {
  std::vector<std::vector<std::string>> records;
  std::vector<std::vector<bool>> quoted;
};

RawTable split_records(std::string_view text, char delim) {
  RawTable table;
  std::vector<std::string> record;
  std::vector<bool> record_quoted;
  std::string field;
  bool in_quotes = false, field_quoted = false, any = false;
  std::size_t quote_start = 0;
  auto end_field = [&] {
    record.push_back(std::move(field));
    record_quoted.push_back(field_quoted);
    field.clear();
    field_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    table.records.push_back(std::move(record));
    table.quoted.push_back(std::move(record_quoted));
    record.clear();
    record_quoted.clear();
    any = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"' && field.empty() && !field_quoted) {
      in_quotes = true;
      field_quoted = true;
      quote_start = i;
      any = true;
    } else if (ch == delim) {
      end_field();
      any = true;
    } else if (ch == '\r') {
      continue;
    } else if (ch == '\n') {
      if (any || !field.empty() || !record.empty()) end_record();
      else table.records.push_back({}), table.quoted.push_back({});
    } else {
      field.push_back(ch);
      any = true;
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field", quote_start);
  if (any || !field.empty() || !record.empty()) end_record();
  // Blank trailing lines carry no data.
  while (!table.records.empty() && table.records.back().empty()) {
    table.records.pop_back();
    table.quoted.pop_back();
  }
  return table;
}

bool is_na(std::string_view raw, bool quoted) {
  auto t = trim(raw);
  if (t.empty()) return true;
  if (quoted) return false;
  return t == "NA" || t == "N/A" || t == "NaN" || t == "nan" || t == "null" || t == "NULL";
}

Column infer_column(std::string name, const std::vector<std::string_view>& cells, const std::vector<bool>& na) {
  std::size_t n = cells.size();
  std::vector<std::uint8_t> valid(n);
  bool all_int = true, all_num = true, all_date = true, all_bool = true;
  std::size_t non_null = 0;
  for (std::size_t i = 0; i < n; ++i) {
    valid[i] = na[i] ? 0 : 1;
    if (na[i]) continue;
    ++non_null;
    if (all_int && !parse_int(cells[i])) all_int = false;
    if (all_num && !all_int && !parse_double(cells[i])) all_num = false;
    if (all_date && !parse_iso_datetime(cells[i])) all_date = false;
    if (all_bool && !parse_bool(cells[i])) all_bool = false;
  }
  if (non_null == 0) {
    return Column::strings(std::move(name), std::vector<std::string>(n), std::move(valid));
  }
  if (all_int) {
    std::vector<std::int64_t> v(n, 0);
    for (std::size_t i = 0; i < n; ++i) if (valid[i]) v[i] = *parse_int(cells[i]);
    return Column::integers(std::move(name), std::move(v), std::move(valid));
  }
  if (all_num) {
    std::vector<double> v(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) if (valid[i]) v[i] = *parse_double(cells[i]);
    return Column::floats(std::move(name), std::move(v), std::move(valid));
  }
  if (all_date) {
    std::vector<std::int64_t> v(n, 0);
    for (std::size_t i = 0; i < n; ++i) if (valid[i]) v[i] = parse_iso_datetime(cells[i])->seconds;
    return Column::datetimes(std::move(name), std::move(v), std::move(valid));
  }
  if (all_bool) {
    std::vector<std::int64_t> v(n, 0);
    for (std::size_t i = 0; i < n; ++i) if (valid[i]) v[i] = *parse_bool(cells[i]) ? 1 : 0;
    return Column::booleans(std::move(name), std::move(v), std::move(valid));
  }
  std::vector<std::string> v(n);
  for (std::size_t i = 0; i < n; ++i) if (valid[i]) v[i] = std::string(cells[i]);
  return Column::strings(std::move(name), std::move(v), std::move(valid));
}

}  // namespace

FrameData parse_csv(std::string_view text, const CsvOptions& options) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);  // BOM
  auto table = split_records(text, options.delimiter);
  if (table.records.empty()) throw InvalidArgument("CSV input is empty");

  std::vector<std::string> names;
  std::size_t first_data = 0;
  if (options.header) {
    std::set<std::string> seen;
    for (auto& raw : table.records[0]) {
      auto name = std::string(trim(raw));
      if (!seen.insert(name).second) throw InvalidArgument("duplicate column name '" + name + "' in header");
      names.push_back(name);
    }
    first_data = 1;
  } else {
    for (std::size_t i = 0; i < table.records[0].size(); ++i) names.push_back(std::to_string(i));
  }
  std::size_t width = names.size();
  std::size_t rows = table.records.size() - first_data;
  for (std::size_t r = first_data; r < table.records.size(); ++r) {
    auto got = table.records[r].size();
    // A blank line in a single-column file is a null cell.
    if (got == 0 && width == 1) {
      table.records[r].push_back("");
      table.quoted[r].push_back(false);
      got = 1;
    }
    if (got != width)
      throw InvalidArgument("row " + std::to_string(r + 1) + " has " + std::to_string(got) + " fields, expected " +
                            std::to_string(width));
  }

  FrameData data;
  data.rows = rows;
  data.version = 1;
  for (std::size_t c = 0; c < width; ++c) {
    std::vector<std::string_view> cells(rows);
    std::vector<bool> na(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      cells[r] = table.records[first_data + r][c];
      na[r] = is_na(cells[r], table.quoted[first_data + r][c]);
    }
    data.columns.push_back(std::make_shared<const Column>(infer_column(names[c], cells, na)));
  }
  data.history.push_back(HistoryEvent{HistoryKind::load,
                                      {{"rows", rows}, {"columns", width}, {"delimiter", std::string(1, options.delimiter)}},
                                      0});
  return data;
}

std::shared_ptr<Frame> load_csv(std::istream& source, const CsvOptions& options) {
  std::string text((std::istreambuf_iterator<char>(source)), std::istreambuf_iterator<char>());
  return Frame::create(parse_csv(text, options));
}

std::shared_ptr<Frame> load_csv_file(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return load_csv(in, options);
}

std::string to_csv(const FrameData& data, char delimiter) {
  auto quote = [&](const std::string& s) {
    if (s.find_first_of(std::string("\"\n\r") + delimiter) == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
      if (ch == '"') out += '"';
      out += ch;
    }
    return out + "\"";
  };
  std::ostringstream os;
  for (std::size_t c = 0; c < data.columns.size(); ++c) {
    if (c) os << delimiter;
    os << quote(data.columns[c]->name());
  }
  os << '\n';
  for (std::size_t r = 0; r < data.rows; ++r) {
    for (std::size_t c = 0; c < data.columns.size(); ++c) {
      if (c) os << delimiter;
      os << quote(data.columns[c]->format(r));
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace luxen
