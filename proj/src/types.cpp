#include "luxen/types.hpp"

#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>

namespace luxen {

std::string_view to_string(StorageType t) noexcept {
  switch (t) {
    case StorageType::integer: return "integer";
    case StorageType::floating: return "float";
    case StorageType::string: return "string";
    case StorageType::boolean: return "boolean";
    case StorageType::datetime: return "datetime";
  }
  return "string";
}

std::string_view to_string(SemanticType t) noexcept {
  switch (t) {
    case SemanticType::nominal: return "nominal";
    case SemanticType::quantitative: return "quantitative";
    case SemanticType::temporal: return "temporal";
    case SemanticType::geographic: return "geographic";
  }
  return "nominal";
}

std::optional<SemanticType> parse_semantic_type(std::string_view text) noexcept {
  auto t = trim(text);
  if (t == "nominal") return SemanticType::nominal;
  if (t == "quantitative") return SemanticType::quantitative;
  if (t == "temporal") return SemanticType::temporal;
  if (t == "geographic") return SemanticType::geographic;
  return std::nullopt;
}

namespace {

int kind_rank(const Cell& c) {
  switch (c.index()) {
    case 0: return 0;  // null
    case 4: return 1;  // bool
    case 1:
    case 2: return 2;  // number
    case 5: return 3;  // datetime
    default: return 4;  // string
  }
}

double as_number(const Cell& c) {
  if (auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  return std::get<double>(c);
}

}  // namespace

std::strong_ordering compare_cells(const Cell& a, const Cell& b) {
  int ka = kind_rank(a), kb = kind_rank(b);
  if (ka != kb) return ka <=> kb;
  switch (ka) {
    case 0: return std::strong_ordering::equal;
    case 1: return std::get<bool>(a) <=> std::get<bool>(b);
    case 2: {
      if (a.index() == 1 && b.index() == 1) return std::get<std::int64_t>(a) <=> std::get<std::int64_t>(b);
      double x = as_number(a), y = as_number(b);
      if (x < y) return std::strong_ordering::less;
      if (x > y) return std::strong_ordering::greater;
      return std::strong_ordering::equal;
    }
    case 3: return std::get<DateTime>(a) <=> std::get<DateTime>(b);
    default: return std::get<std::string>(a).compare(std::get<std::string>(b)) <=> 0;
  }
}

std::string format_cell(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const {
      if (std::isnan(v)) return "NaN";
      char buf[64];
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
      return std::string(buf, end);
    }
    std::string operator()(const std::string& v) const { return v; }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(DateTime v) const { return format_datetime(v); }
  };
  return std::visit(Visitor{}, c);
}

namespace {

bool read_digits(std::string_view s, std::size_t& pos, std::size_t count, int& out) {
  if (pos + count > s.size()) return false;
  int v = 0;
  for (std::size_t i = 0; i < count; ++i) {
    char ch = s[pos + i];
    if (ch < '0' || ch > '9') return false;
    v = v * 10 + (ch - '0');
  }
  pos += count;
  out = v;
  return true;
}

}  // namespace

std::optional<DateTime> parse_iso_datetime(std::string_view text) noexcept {
  auto s = trim(text);
  std::size_t pos = 0;
  int y = 0, m = 0, d = 0, hh = 0, mm = 0, ss = 0;
  if (!read_digits(s, pos, 4, y)) return std::nullopt;
  if (pos >= s.size() || s[pos++] != '-') return std::nullopt;
  if (!read_digits(s, pos, 2, m)) return std::nullopt;
  if (pos >= s.size() || s[pos++] != '-') return std::nullopt;
  if (!read_digits(s, pos, 2, d)) return std::nullopt;
  if (pos < s.size()) {
    if (s[pos] != 'T' && s[pos] != ' ') return std::nullopt;
    ++pos;
    if (!read_digits(s, pos, 2, hh)) return std::nullopt;
    if (pos >= s.size() || s[pos++] != ':') return std::nullopt;
    if (!read_digits(s, pos, 2, mm)) return std::nullopt;
    if (pos < s.size() && s[pos] == ':') {
      ++pos;
      if (!read_digits(s, pos, 2, ss)) return std::nullopt;
    }
    if (pos < s.size() && s[pos] == 'Z') ++pos;
    if (pos != s.size()) return std::nullopt;
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  }
  using namespace std::chrono;
  year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  auto days = sys_days{ymd}.time_since_epoch().count();
  return DateTime{static_cast<std::int64_t>(days) * 86400 + hh * 3600 + mm * 60 + ss};
}

CivilDate civil_from(DateTime t) noexcept {
  using namespace std::chrono;
  auto secs = t.seconds;
  auto day_count = secs >= 0 ? secs / 86400 : -((-secs + 86399) / 86400);
  year_month_day ymd{sys_days{days{day_count}}};
  return {static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
          static_cast<unsigned>(ymd.day())};
}

std::string format_datetime(DateTime t) {
  auto date = civil_from(t);
  auto secs = t.seconds;
  auto day_count = secs >= 0 ? secs / 86400 : -((-secs + 86399) / 86400);
  auto rem = secs - day_count * 86400;
  char buf[48];
  if (rem == 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", date.year, date.month, date.day);
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", date.year, date.month, date.day,
                  static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60),
                  static_cast<int>(rem % 60));
  }
  return buf;
}

std::optional<std::int64_t> parse_int(std::string_view text) noexcept {
  auto s = trim(text);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> parse_double(std::string_view text) noexcept {
  auto s = trim(text);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<bool> parse_bool(std::string_view text) noexcept {
  auto s = to_lower(trim(text));
  if (s == "true") return true;
  if (s == "false") return false;
  return std::nullopt;
}

std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

}  // namespace luxen
