#include "luxen/transform.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "luxen/frame.hpp"

namespace luxen {

std::string_view to_string(HistoryKind k) noexcept {
  switch (k) {
    case HistoryKind::load: return "load";
    case HistoryKind::filter: return "filter";
    case HistoryKind::project: return "project";
    case HistoryKind::rename: return "rename";
    case HistoryKind::set_column: return "set-column";
    case HistoryKind::group_aggregate: return "group-aggregate";
    case HistoryKind::pivot: return "pivot";
    case HistoryKind::inplace_modify: return "inplace-modify";
    case HistoryKind::head_tail: return "head-tail";
  }
  return "load";
}

HistoryKind Transform::kind() const noexcept {
  static constexpr HistoryKind kinds[] = {HistoryKind::filter,          HistoryKind::project,
                                          HistoryKind::rename,          HistoryKind::set_column,
                                          HistoryKind::group_aggregate, HistoryKind::pivot,
                                          HistoryKind::head_tail,       HistoryKind::inplace_modify};
  return kinds[op.index()];
}

RowMatcher::RowMatcher(const Column& column, FilterOp op, std::string_view value) : column_(&column), op_(op) {
  switch (column.type()) {
    case StorageType::integer:
    case StorageType::floating:
      if (auto d = parse_double(value)) { mode_ = Mode::number; number_ = *d; }
      break;
    case StorageType::datetime:
      if (auto t = parse_iso_datetime(value)) { mode_ = Mode::number; number_ = static_cast<double>(t->seconds); }
      break;
    case StorageType::boolean:
      if (auto b = parse_bool(value)) { mode_ = Mode::number; number_ = *b ? 1.0 : 0.0; }
      break;
    case StorageType::string:
      mode_ = Mode::text;
      text_ = std::string(value);
      break;
  }
}

bool RowMatcher::operator()(std::size_t row) const {
  if (column_->is_null(row)) return false;
  int cmp = 0;
  switch (mode_) {
    case Mode::never: return op_ == FilterOp::ne;
    case Mode::number: {
      double v = column_->number(row);
      cmp = v < number_ ? -1 : (v > number_ ? 1 : 0);
      break;
    }
    case Mode::text: cmp = column_->text(row).compare(text_); break;
  }
  switch (op_) {
    case FilterOp::eq: return cmp == 0;
    case FilterOp::ne: return cmp != 0;
    case FilterOp::lt: return cmp < 0;
    case FilterOp::le: return cmp <= 0;
    case FilterOp::gt: return cmp > 0;
    case FilterOp::ge: return cmp >= 0;
  }
  return false;
}

// ---------------------------------------------------------------------------
// JSON descriptors

namespace {

using nlohmann::json;

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number()) return format_cell(v.get<double>());
  throw InvalidArgument("expected a scalar value");
}

Aggregation need_aggregation(const json& v) {
  auto a = parse_aggregation(v.get<std::string>());
  if (!a) throw InvalidArgument("unknown aggregation '" + v.get<std::string>() + "'");
  return *a;
}

Comparison comparison_from_json(const json& j) {
  Comparison c;
  c.column = j.at("column").get<std::string>();
  auto op = parse_filter_op(j.value("op", std::string("=")));
  if (!op) throw InvalidArgument("malformed filter operator");
  c.op = *op;
  c.value = scalar_text(j.at("value"));
  return c;
}

}  // namespace

Transform transform_from_json(const json& j) {
  if (!j.is_object() || !j.contains("op")) throw InvalidArgument("transform needs an 'op' field");
  auto name = j.at("op").get<std::string>();
  Transform t;
  try {
    if (name == "filter") {
      FilterRows f;
      if (j.contains("predicate")) {
        for (const auto& c : j.at("predicate")) f.predicate.push_back(comparison_from_json(c));
      } else {
        json c = {{"column", j.at("column")}, {"op", j.value("cmp", std::string("="))}, {"value", j.at("value")}};
        f.predicate.push_back(comparison_from_json(c));
      }
      if (f.predicate.empty()) throw InvalidArgument("filter needs at least one comparison");
      t.op = std::move(f);
    } else if (name == "project") {
      t.op = ProjectColumns{j.at("columns").get<std::vector<std::string>>()};
    } else if (name == "rename") {
      RenameColumns r;
      for (auto& [from, to] : j.at("mapping").items()) r.mapping.emplace_back(from, to.get<std::string>());
      t.op = std::move(r);
    } else if (name == "set_column" || name == "set-column") {
      SetColumn s;
      s.name = j.at("name").get<std::string>();
      if (j.contains("values")) {
        s.values = j.at("values");
      } else {
        s.source = j.at("source").get<std::string>();
        auto a = j.value("arith", std::string("*"));
        if (a.size() != 1 || std::string_view("+-*/").find(a[0]) == std::string_view::npos)
          throw InvalidArgument("arith must be one of + - * /");
        s.arith = a[0];
        s.operand = j.value("operand", 1.0);
      }
      t.op = std::move(s);
      t.inplace = true;
    } else if (name == "group_aggregate" || name == "group-aggregate" || name == "groupby") {
      GroupAggregate g;
      g.keys = j.at("keys").get<std::vector<std::string>>();
      for (auto& [col, agg] : j.at("aggregations").items()) g.aggregations.emplace_back(col, need_aggregation(agg));
      t.op = std::move(g);
    } else if (name == "pivot") {
      Pivot p;
      p.index = j.at("index").get<std::string>();
      p.columns = j.at("columns").get<std::string>();
      p.values = j.at("values").get<std::string>();
      if (j.contains("aggregation") && !j.at("aggregation").is_null()) p.aggregation = need_aggregation(j.at("aggregation"));
      t.op = std::move(p);
    } else if (name == "head_tail" || name == "head-tail" || name == "head" || name == "tail") {
      HeadTail h;
      h.n = j.value("n", std::size_t{5});
      h.tail = name == "tail" || j.value("tail", false);
      t.op = h;
    } else if (name == "inplace_modify" || name == "inplace-modify") {
      t.op = InplaceModify{j.value("marker", std::string("touch"))};
      t.inplace = true;
    } else {
      throw InvalidArgument("unknown transform '" + name + "'");
    }
  } catch (const json::exception& e) {
    throw InvalidArgument("malformed '" + name + "' transform: " + e.what());
  }
  if (j.contains("inplace")) t.inplace = j.at("inplace").get<bool>();
  return t;
}

json transform_to_json(const Transform& t) {
  struct Visitor {
    json operator()(const FilterRows& f) const {
      json preds = json::array();
      for (const auto& c : f.predicate)
        preds.push_back({{"column", c.column}, {"op", std::string(to_string(c.op))}, {"value", c.value}});
      return {{"op", "filter"}, {"predicate", preds}};
    }
    json operator()(const ProjectColumns& p) const { return {{"op", "project"}, {"columns", p.columns}}; }
    json operator()(const RenameColumns& r) const {
      json m = json::object();
      for (const auto& [from, to] : r.mapping) m[from] = to;
      return {{"op", "rename"}, {"mapping", m}};
    }
    json operator()(const SetColumn& s) const {
      json j = {{"op", "set_column"}, {"name", s.name}};
      if (s.values) j["values"] = *s.values;
      else {
        j["source"] = s.source;
        j["arith"] = std::string(1, s.arith);
        j["operand"] = s.operand;
      }
      return j;
    }
    json operator()(const GroupAggregate& g) const {
      json aggs = json::object();
      for (const auto& [col, agg] : g.aggregations) aggs[col] = std::string(to_string(agg));
      return {{"op", "group_aggregate"}, {"keys", g.keys}, {"aggregations", aggs}};
    }
    json operator()(const Pivot& p) const {
      json j = {{"op", "pivot"}, {"index", p.index}, {"columns", p.columns}, {"values", p.values}};
      if (p.aggregation) j["aggregation"] = std::string(to_string(*p.aggregation));
      return j;
    }
    json operator()(const HeadTail& h) const { return {{"op", "head_tail"}, {"n", h.n}, {"tail", h.tail}}; }
    json operator()(const InplaceModify& m) const { return {{"op", "inplace_modify"}, {"marker", m.marker}}; }
  };
  auto j = std::visit(Visitor{}, t.op);
  j["inplace"] = t.inplace;
  return j;
}

// ---------------------------------------------------------------------------
// Application

namespace {

std::shared_ptr<const Column> share(Column c) { return std::make_shared<const Column>(std::move(c)); }

FrameData take_rows(const FrameData& in, std::span<const std::uint32_t> rows) {
  FrameData out = in;
  out.rows = rows.size();
  for (auto& c : out.columns) c = share(c->take(rows));
  if (in.index.empty()) {
    // Keep the original positions as labels once rows are selected.
    std::vector<std::int64_t> labels(rows.begin(), rows.end());
    out.index = {share(Column::integers("index", std::move(labels)))};
  } else {
    for (auto& c : out.index) c = share(c->take(rows));
  }
  return out;
}

void require_columns(const FrameData& in, const std::vector<std::string>& names) {
  for (const auto& n : names)
    if (!in.column_index(n)) throw ColumnNotFound(n);
}

/// Running aggregate over doubles.
struct Accumulator {
  std::size_t count = 0;
  double sum = 0, mean = 0, m2 = 0, lo = 0, hi = 0;
  void add(double v) {
    if (count == 0) lo = hi = v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    ++count;
    sum += v;
    double delta = v - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (v - mean);
  }
  std::optional<double> result(Aggregation a) const {
    switch (a) {
      case Aggregation::count: return static_cast<double>(count);
      case Aggregation::sum: return sum;
      case Aggregation::mean:
      case Aggregation::none: return count ? std::optional<double>(sum / static_cast<double>(count)) : std::nullopt;
      case Aggregation::min: return count ? std::optional<double>(lo) : std::nullopt;
      case Aggregation::max: return count ? std::optional<double>(hi) : std::nullopt;
      case Aggregation::variance:
        return count > 1 ? std::optional<double>(m2 / static_cast<double>(count - 1)) : std::nullopt;
    }
    return std::nullopt;
  }
};

std::string key_of(const FrameData&, const std::vector<const Column*>& cols, std::size_t row) {
  std::string key;
  for (auto* c : cols) {
    key += c->is_null(row) ? std::string("\x01") : c->format(row);
    key += '\x1f';
  }
  return key;
}

FrameData group_aggregate(const FrameData& in, const GroupAggregate& g) {
  if (g.keys.empty()) throw InvalidArgument("group-aggregate needs at least one key");
  require_columns(in, g.keys);
  std::vector<const Column*> keys;
  for (const auto& k : g.keys) keys.push_back(&in.column(k));
  auto aggs = g.aggregations;
  if (aggs.empty()) {
    for (const auto& c : in.columns)
      if (std::find(g.keys.begin(), g.keys.end(), c->name()) == g.keys.end() && c->is_numeric() &&
          c->type() != StorageType::datetime)
        aggs.emplace_back(c->name(), Aggregation::mean);
  }
  for (const auto& [col, agg] : aggs) {
    if (!in.column_index(col)) throw ColumnNotFound(col);
    if (agg != Aggregation::count && !in.column(col).is_numeric())
      throw InvalidArgument("cannot aggregate non-numeric column '" + col + "' with " + std::string(to_string(agg)));
  }

  std::unordered_map<std::string, std::size_t> group_of;
  std::vector<std::size_t> first_row;
  std::vector<std::vector<Accumulator>> acc;
  for (std::size_t r = 0; r < in.rows; ++r) {
    bool null_key = std::any_of(keys.begin(), keys.end(), [&](const Column* c) { return c->is_null(r); });
    if (null_key) continue;  // pandas drops null keys
    auto [it, inserted] = group_of.try_emplace(key_of(in, keys, r), first_row.size());
    if (inserted) {
      first_row.push_back(r);
      acc.emplace_back(aggs.size());
    }
    auto& row_acc = acc[it->second];
    for (std::size_t a = 0; a < aggs.size(); ++a) {
      const auto& col = in.column(aggs[a].first);
      if (col.is_null(r)) continue;
      row_acc[a].add(aggs[a].second == Aggregation::count && !col.is_numeric() ? 0.0 : col.number(r));
    }
  }
  // Groups come out sorted by key.
  std::vector<std::size_t> order(first_row.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (auto* c : keys) {
      auto cmp = compare_cells(c->cell(first_row[a]), c->cell(first_row[b]));
      if (cmp != 0) return cmp < 0;
    }
    return false;
  });

  FrameData out = in;
  out.rows = order.size();
  out.pre_aggregated = true;
  out.index.clear();
  std::vector<std::uint32_t> firsts;
  for (auto o : order) firsts.push_back(static_cast<std::uint32_t>(first_row[o]));
  for (auto* k : keys) out.index.push_back(share(k->take(firsts)));
  out.columns.clear();
  std::map<std::string, int> name_uses;
  for (const auto& a : aggs) name_uses[a.first]++;
  for (std::size_t a = 0; a < aggs.size(); ++a) {
    auto name = aggs[a].first;
    if (name_uses[name] > 1) name += "_" + std::string(to_string(aggs[a].second));
    std::vector<double> values(order.size(), 0.0);
    std::vector<std::uint8_t> valid(order.size(), 1);
    for (std::size_t i = 0; i < order.size(); ++i) {
      auto v = acc[order[i]][a].result(aggs[a].second);
      if (v) values[i] = *v;
      else valid[i] = 0;
    }
    if (aggs[a].second == Aggregation::count) {
      std::vector<std::int64_t> counts(values.begin(), values.end());
      out.columns.push_back(share(Column::integers(name, std::move(counts), std::move(valid))));
    } else {
      out.columns.push_back(share(Column::floats(name, std::move(values), std::move(valid))));
    }
  }
  return out;
}

FrameData pivot(const FrameData& in, const Pivot& p) {
  require_columns(in, {p.index, p.columns, p.values});
  const auto& idx = in.column(p.index);
  const auto& cols = in.column(p.columns);
  const auto& vals = in.column(p.values);
  auto agg = p.aggregation.value_or(Aggregation::none);
  if (agg != Aggregation::count && !vals.is_numeric())
    throw InvalidArgument("pivot values column '" + p.values + "' must be numeric");

  std::map<std::string, std::size_t> row_of, col_of;
  std::vector<std::size_t> row_first, col_first;
  auto sorted_ids = [](const Column& c, std::size_t rows) {
    std::vector<std::uint32_t> firsts;
    std::map<std::string, bool> seen;
    for (std::uint32_t r = 0; r < rows; ++r) {
      if (c.is_null(r)) continue;
      if (seen.emplace(c.format(r), true).second) firsts.push_back(r);
    }
    std::sort(firsts.begin(), firsts.end(),
              [&](auto a, auto b) { return compare_cells(c.cell(a), c.cell(b)) < 0; });
    return firsts;
  };
  auto row_firsts = sorted_ids(idx, in.rows);
  auto col_firsts = sorted_ids(cols, in.rows);
  for (std::size_t i = 0; i < row_firsts.size(); ++i) row_of[idx.format(row_firsts[i])] = i;
  for (std::size_t i = 0; i < col_firsts.size(); ++i) col_of[cols.format(col_firsts[i])] = i;

  std::vector<Accumulator> acc(row_firsts.size() * col_firsts.size());
  for (std::size_t r = 0; r < in.rows; ++r) {
    if (idx.is_null(r) || cols.is_null(r) || vals.is_null(r)) continue;
    auto cell = row_of[idx.format(r)] * col_firsts.size() + col_of[cols.format(r)];
    if (!p.aggregation && acc[cell].count > 0)
      throw InvalidArgument("pivot has duplicate entries for (" + idx.format(r) + ", " + cols.format(r) +
                            ") and no aggregation");
    acc[cell].add(vals.is_numeric() ? vals.number(r) : 0.0);
  }

  FrameData out = in;
  out.rows = row_firsts.size();
  out.pre_aggregated = true;
  out.index = {share(idx.take(row_firsts))};
  out.columns.clear();
  out.overrides.clear();
  for (std::size_t c = 0; c < col_firsts.size(); ++c) {
    std::vector<double> values(row_firsts.size(), 0.0);
    std::vector<std::uint8_t> valid(row_firsts.size(), 1);
    for (std::size_t r = 0; r < row_firsts.size(); ++r) {
      auto v = acc[r * col_firsts.size() + c].result(agg);
      if (v && acc[r * col_firsts.size() + c].count > 0) values[r] = *v;
      else valid[r] = 0;
    }
    out.columns.push_back(share(Column::floats(cols.format(col_firsts[c]), std::move(values), std::move(valid))));
  }
  return out;
}

Column column_from_json(const std::string& name, const json& values, std::size_t rows) {
  if (!values.is_array() || values.size() != rows)
    throw InvalidArgument("set-column '" + name + "' needs exactly " + std::to_string(rows) + " values");
  bool all_int = true, all_num = true, all_bool = true;
  std::size_t non_null = 0;
  for (const auto& v : values) {
    if (v.is_null()) continue;
    ++non_null;
    all_int &= v.is_number_integer();
    all_num &= v.is_number();
    all_bool &= v.is_boolean();
  }
  std::vector<std::uint8_t> valid(rows, 1);
  for (std::size_t i = 0; i < rows; ++i) valid[i] = values[i].is_null() ? 0 : 1;
  if (non_null > 0 && all_int) {
    std::vector<std::int64_t> out(rows, 0);
    for (std::size_t i = 0; i < rows; ++i) if (valid[i]) out[i] = values[i].get<std::int64_t>();
    return Column::integers(name, std::move(out), std::move(valid));
  }
  if (non_null > 0 && all_num) {
    std::vector<double> out(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) if (valid[i]) out[i] = values[i].get<double>();
    return Column::floats(name, std::move(out), std::move(valid));
  }
  if (non_null > 0 && all_bool) {
    std::vector<std::int64_t> out(rows, 0);
    for (std::size_t i = 0; i < rows; ++i) if (valid[i]) out[i] = values[i].get<bool>() ? 1 : 0;
    return Column::booleans(name, std::move(out), std::move(valid));
  }
  std::vector<std::string> out(rows);
  for (std::size_t i = 0; i < rows; ++i) if (valid[i]) out[i] = scalar_text(values[i]);
  return Column::strings(name, std::move(out), std::move(valid));
}

FrameData set_column(const FrameData& in, const SetColumn& s) {
  Column col;
  if (s.values) {
    col = column_from_json(s.name, *s.values, in.rows);
  } else {
    const auto& src = in.column(s.source);
    if (!src.is_numeric() || src.type() == StorageType::datetime)
      throw InvalidArgument("set-column source '" + s.source + "' must be numeric");
    std::vector<double> out(in.rows, 0.0);
    std::vector<std::uint8_t> valid(src.validity().begin(), src.validity().end());
    for (std::size_t r = 0; r < in.rows; ++r) {
      if (!valid[r]) continue;
      double v = src.number(r);
      switch (s.arith) {
        case '+': out[r] = v + s.operand; break;
        case '-': out[r] = v - s.operand; break;
        case '/': out[r] = v / s.operand; break;
        default: out[r] = v * s.operand; break;
      }
    }
    col = Column::floats(s.name, std::move(out), std::move(valid));
  }
  FrameData out = in;
  auto shared = share(std::move(col));
  if (auto i = in.column_index(s.name)) {
    out.columns[*i] = shared;
    out.overrides.erase(s.name);
  } else {
    out.columns.push_back(shared);
  }
  return out;
}

FrameData inplace_modify(const FrameData& in, const InplaceModify& m) {
  if (m.marker == "touch") return in;
  if (m.marker == "dropna") {
    std::vector<std::uint32_t> keep;
    for (std::uint32_t r = 0; r < in.rows; ++r) {
      bool any_null = std::any_of(in.columns.begin(), in.columns.end(), [&](const auto& c) { return c->is_null(r); });
      if (!any_null) keep.push_back(r);
    }
    return take_rows(in, keep);
  }
  constexpr std::string_view sort_prefix = "sort_values:";
  if (m.marker.starts_with(sort_prefix)) {
    const auto& col = in.column(m.marker.substr(sort_prefix.size()));
    std::vector<std::uint32_t> order(in.rows);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
      if (col.is_null(a) != col.is_null(b)) return col.is_null(b);  // nulls last
      return compare_cells(col.cell(a), col.cell(b)) < 0;
    });
    return take_rows(in, order);
  }
  throw InvalidArgument("unknown inplace marker '" + m.marker + "'");
}

}  // namespace

FrameData transform_data(const FrameData& in, const Transform& t) {
  struct Visitor {
    const FrameData& in;
    FrameData operator()(const FilterRows& f) const { return take_rows(in, matching_rows(in, f.predicate)); }
    FrameData operator()(const ProjectColumns& p) const {
      if (p.columns.empty()) throw InvalidArgument("project needs at least one column");
      require_columns(in, p.columns);
      FrameData out = in;
      out.columns.clear();
      for (const auto& n : p.columns) out.columns.push_back(in.columns[*in.column_index(n)]);
      return out;
    }
    FrameData operator()(const RenameColumns& r) const {
      FrameData out = in;
      for (const auto& [from, to] : r.mapping) {
        auto i = out.column_index(from);
        if (!i) throw ColumnNotFound(from);
        out.columns[*i] = share(out.columns[*i]->renamed(to));
        if (auto it = out.overrides.find(from); it != out.overrides.end()) {
          auto type = it->second;
          out.overrides.erase(it);
          out.overrides[to] = type;
        }
      }
      std::set<std::string> names;
      for (const auto& c : out.columns)
        if (!names.insert(c->name()).second) throw InvalidArgument("rename produces duplicate column '" + c->name() + "'");
      return out;
    }
    FrameData operator()(const SetColumn& s) const { return set_column(in, s); }
    FrameData operator()(const GroupAggregate& g) const { return group_aggregate(in, g); }
    FrameData operator()(const Pivot& p) const { return pivot(in, p); }
    FrameData operator()(const HeadTail& h) const {
      std::size_t n = std::min(h.n, in.rows);
      std::vector<std::uint32_t> rows(n);
      std::iota(rows.begin(), rows.end(), static_cast<std::uint32_t>(h.tail ? in.rows - n : 0));
      return take_rows(in, rows);
    }
    FrameData operator()(const InplaceModify& m) const { return inplace_modify(in, m); }
  };
  FrameData out = std::visit(Visitor{in}, t.op);
  out.version = in.version + 1;
  std::uint64_t seq = in.history.empty() ? 0 : in.history.back().seq + 1;
  auto params = transform_to_json(t);
  out.history.push_back(HistoryEvent{t.kind(), std::move(params), seq});
  return out;
}

}  // namespace luxen
