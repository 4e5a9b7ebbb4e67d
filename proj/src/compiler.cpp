#include "luxen/compiler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace luxen {

std::string_view to_string(Mark m) noexcept {
  switch (m) {
    case Mark::scatter: return "scatter";
    case Mark::color_scatter: return "color-scatter";
    case Mark::bar: return "bar";
    case Mark::color_bar: return "color-bar";
    case Mark::line: return "line";
    case Mark::color_line: return "color-line";
    case Mark::histogram: return "histogram";
    case Mark::heatmap: return "heatmap";
    case Mark::color_heatmap: return "color-heatmap";
    case Mark::map: return "map";
  }
  return "bar";
}

std::string_view to_string(TimeUnit u) noexcept {
  switch (u) {
    case TimeUnit::year: return "year";
    case TimeUnit::month: return "yearmonth";
    case TimeUnit::day: return "yearmonthdate";
  }
  return "yearmonthdate";
}

// ---------------------------------------------------------------------------
// Validation

std::size_t levenshtein(std::string_view a, std::string_view b) {
  auto la = to_lower(a), lb = to_lower(b);
  std::vector<std::size_t> prev(lb.size() + 1), cur(lb.size() + 1);
  for (std::size_t j = 0; j <= lb.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= la.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= lb.size(); ++j) {
      std::size_t sub = prev[j - 1] + (la[i - 1] == lb[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[lb.size()];
}

std::optional<std::string> suggest_column(std::string_view name, const MetadataSet& meta, std::size_t max_distance) {
  std::optional<std::string> best;
  std::size_t best_d = max_distance + 1;
  for (const auto& c : meta.columns) {
    auto d = levenshtein(name, c.name);
    if (d < best_d || (d == best_d && best && c.name < *best)) {
      best_d = d;
      best = c.name;
    }
  }
  if (best_d > max_distance) return std::nullopt;
  return best;
}

namespace {

bool value_matches(const Cell& cell, std::string_view value) {
  return std::visit(
      [&](const auto& v) -> bool {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return false;
        } else if constexpr (std::is_same_v<T, std::int64_t> || std::is_same_v<T, double>) {
          auto p = parse_double(trim(value));
          return p && *p == static_cast<double>(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          auto p = parse_bool(trim(value));
          return p && *p == v;
        } else if constexpr (std::is_same_v<T, DateTime>) {
          auto p = parse_iso_datetime(trim(value));
          return p && *p == v;
        } else {
          return v == value;
        }
      },
      cell);
}

bool value_parses(const ColumnMetadata& m, std::string_view value) {
  auto t = trim(value);
  switch (m.storage) {
    case StorageType::integer:
    case StorageType::floating: return parse_double(t).has_value();
    case StorageType::datetime: return parse_iso_datetime(t).has_value();
    case StorageType::boolean: return parse_bool(t).has_value();
    case StorageType::string: return true;
  }
  return true;
}

std::string quote(std::string_view s) { return "'" + std::string(s) + "'"; }

}  // namespace

std::vector<IntentWarning> validate_intent(const IntentSpec& intent, const MetadataSet& meta) {
  std::vector<IntentWarning> warnings;
  std::size_t resolvable = 0;
  for (std::size_t i = 0; i < intent.clauses.size(); ++i) {
    const auto& c = intent.clauses[i];
    bool ok = false;
    if (c.attribute.wildcard) {
      for (const auto& m : meta.columns)
        if (!c.attribute.constraint || m.semantic == *c.attribute.constraint) ok = true;
      if (!ok) {
        warnings.push_back({i, "empty-wildcard",
                            "no columns of type " + std::string(to_string(*c.attribute.constraint)), std::nullopt});
      }
    } else {
      for (const auto& name : c.attribute.names) {
        const auto* m = meta.find(name);
        if (!m) {
          auto s = suggest_column(name, meta);
          std::string msg = "unknown attribute " + quote(name);
          if (s) msg += "; did you mean " + quote(*s) + "?";
          warnings.push_back({i, "unknown-attribute", msg, s});
          continue;
        }
        ok = true;
        if (c.kind != ClauseKind::filter || c.value.wildcard) continue;
        for (const auto& v : c.value.values) {
          bool known = true;
          if (!value_parses(*m, v)) {
            known = false;
          } else if ((c.op == FilterOp::eq || c.op == FilterOp::ne) && !m->capped) {
            known = std::any_of(m->unique_values.begin(), m->unique_values.end(),
                                [&](const Cell& u) { return value_matches(u, v); });
          }
          if (!known)
            warnings.push_back({i, "unknown-value", "value " + quote(v) + " does not occur in " + quote(name),
                                std::nullopt});
        }
      }
    }
    if (ok) ++resolvable;
  }
  if (intent.clauses.empty()) throw IntentError("intent has no clauses", warnings);
  if (resolvable == 0) {
    std::string msg = "intent does not reference any known column";
    for (const auto& w : warnings) msg += "\n  " + w.message;
    throw IntentError(msg, warnings);
  }
  return warnings;
}

// ---------------------------------------------------------------------------
// Expansion

namespace {

using Alternative = std::variant<AxisSpec, Comparison>;

std::vector<Alternative> alternatives(const ClauseSpec& c, const MetadataSet& meta) {
  std::vector<std::string> attrs;
  if (c.attribute.wildcard) {
    for (const auto& m : meta.columns)
      if (!c.attribute.constraint || m.semantic == *c.attribute.constraint) attrs.push_back(m.name);
  } else {
    for (const auto& n : c.attribute.names)
      if (meta.find(n)) attrs.push_back(n);
  }
  std::vector<Alternative> out;
  for (const auto& a : attrs) {
    if (c.kind == ClauseKind::axis) {
      out.emplace_back(AxisSpec{a, c.channel, c.aggregation, c.bin_size, std::nullopt});
      continue;
    }
    auto op = c.op.value_or(FilterOp::eq);
    if (c.value.wildcard) {
      const auto& m = meta.at(a);
      if (m.capped)
        throw InvalidArgument("cannot enumerate values of " + quote(a) + ": more than " +
                              std::to_string(kUniqueValueCap) + " distinct values");
      for (const auto& u : m.unique_values) out.emplace_back(Comparison{a, op, format_cell(u)});
    } else {
      for (const auto& v : c.value.values) out.emplace_back(Comparison{a, op, v});
    }
  }
  return out;
}

std::vector<std::string> axis_names(const PartialVisSpec& p) {
  std::vector<std::string> names;
  for (const auto& a : p.axes) names.push_back(a.attribute);
  return names;
}

struct AxisKey {
  std::string attribute;
  int channel, aggregation, bin;
  auto operator<=>(const AxisKey&) const = default;
};

struct SpecKey {
  std::vector<AxisKey> axes;
  std::vector<std::tuple<std::string, int, std::string>> filters;
  auto operator<=>(const SpecKey&) const = default;
};

SpecKey unordered_key(const PartialVisSpec& p) {
  SpecKey key;
  for (const auto& a : p.axes)
    key.axes.push_back({a.attribute, a.channel ? static_cast<int>(*a.channel) : -1,
                        a.aggregation ? static_cast<int>(*a.aggregation) : -1, a.bin_size.value_or(-1)});
  for (const auto& f : p.filters) key.filters.emplace_back(f.column, static_cast<int>(f.op), f.value);
  std::sort(key.axes.begin(), key.axes.end());
  std::sort(key.filters.begin(), key.filters.end());
  return key;
}

}  // namespace

std::vector<PartialVisSpec> expand_intent(const IntentSpec& intent, const MetadataSet& meta) {
  std::vector<std::vector<Alternative>> lists;
  for (const auto& c : intent.clauses) {
    auto alts = alternatives(c, meta);
    // Named clauses that resolve to nothing were reported by validation; skip them.
    if (alts.empty() && !c.attribute.wildcard) continue;
    if (alts.empty()) return {};
    lists.push_back(std::move(alts));
  }
  if (lists.empty()) return {};

  std::vector<PartialVisSpec> out;
  std::map<SpecKey, std::size_t> seen;
  std::vector<std::size_t> idx(lists.size(), 0);
  while (true) {
    PartialVisSpec p;
    for (std::size_t i = 0; i < lists.size(); ++i) {
      const auto& alt = lists[i][idx[i]];
      if (auto* a = std::get_if<AxisSpec>(&alt)) p.axes.push_back(*a);
      else p.filters.push_back(std::get<Comparison>(alt));
    }
    std::set<std::string> distinct;
    for (const auto& a : p.axes) distinct.insert(a.attribute);
    if (distinct.size() == p.axes.size() && p.axes.size() <= kMaxAxes) {
      auto key = unordered_key(p);
      auto [it, fresh] = seen.emplace(key, out.size());
      if (fresh) out.push_back(std::move(p));
      else if (axis_names(p) < axis_names(out[it->second])) out[it->second] = std::move(p);
    }
    std::size_t i = lists.size();
    while (i > 0) {
      --i;
      if (++idx[i] < lists[i].size()) break;
      idx[i] = 0;
      if (i == 0) return out;
    }
  }
}

// ---------------------------------------------------------------------------
// Channel assignment shared by lookup and infer

namespace {

struct Plan {
  Mark mark = Mark::bar;
  // Axis indexes (into partial.axes) per channel; -1 unused, kCount a row count.
  static constexpr int kCount = -2;
  int x = -1, y = -1, color = -1;
  enum class Role { raw, dimension, measure, binned } role[kMaxAxes] = {};
};

SemanticType type_of(const AxisSpec& a, const MetadataSet& meta) {
  if (a.type) return *a.type;
  return meta.at(a.attribute).semantic;
}

std::size_t card_of(const AxisSpec& a, const MetadataSet& meta) { return meta.at(a.attribute).cardinality; }

Plan plan_for(const PartialVisSpec& p, const MetadataSet& meta, std::size_t rows, const EncodingOptions& opt) {
  using Role = Plan::Role;
  Plan plan;
  std::vector<int> q, d;
  for (std::size_t i = 0; i < p.axes.size(); ++i)
    (type_of(p.axes[i], meta) == SemanticType::quantitative ? q : d).push_back(static_cast<int>(i));
  auto type = [&](int i) { return type_of(p.axes[i], meta); };
  auto explicit_none = [&](int i) { return p.axes[i].aggregation == Aggregation::none; };
  auto has_bins = [&](int i) { return p.axes[i].bin_size.has_value(); };
  // Dimension pair: temporal goes on x; otherwise the higher-cardinality one.
  auto order_dims = [&](int a, int b) -> std::pair<int, int> {
    if (type(a) == SemanticType::temporal) return {a, b};
    if (type(b) == SemanticType::temporal) return {b, a};
    if (card_of(p.axes[b], meta) > card_of(p.axes[a], meta)) return {b, a};
    return {a, b};
  };
  auto dim_mark = [&](int xi, bool colored) {
    switch (type(xi)) {
      case SemanticType::temporal: return colored ? Mark::color_line : Mark::line;
      case SemanticType::geographic: return colored ? Mark::color_bar : Mark::map;
      default: return colored ? Mark::color_bar : Mark::bar;
    }
  };

  std::size_t nq = q.size(), nd = d.size();
  if (nq == 1 && nd == 0) {
    int a = q[0];
    auto agg = p.axes[a].aggregation;
    if (agg && *agg != Aggregation::none && *agg != Aggregation::count) {
      plan.mark = Mark::bar;
      plan.y = a;
      plan.role[a] = Role::measure;
    } else {
      plan.mark = Mark::histogram;
      plan.x = a;
      plan.role[a] = Role::binned;
      plan.y = Plan::kCount;
    }
  } else if (nq == 0 && nd == 1) {
    plan.mark = dim_mark(d[0], false);
    plan.x = d[0];
    plan.role[d[0]] = Role::dimension;
    plan.y = Plan::kCount;
  } else if (nq == 2 && nd == 0) {
    plan.x = q[0];
    plan.y = q[1];
    if (rows > opt.scatter_row_limit || has_bins(q[0]) || has_bins(q[1])) {
      plan.mark = Mark::heatmap;
      plan.role[q[0]] = plan.role[q[1]] = Role::binned;
      plan.color = Plan::kCount;
    } else {
      plan.mark = Mark::scatter;
    }
  } else if (nq == 1 && nd == 1) {
    plan.x = d[0];
    plan.y = q[0];
    if (explicit_none(q[0])) {
      plan.mark = Mark::scatter;
    } else {
      plan.mark = dim_mark(d[0], false);
      plan.role[d[0]] = Role::dimension;
      plan.role[q[0]] = Role::measure;
    }
  } else if (nq == 0 && nd == 2) {
    auto [xi, ci] = order_dims(d[0], d[1]);
    plan.x = xi;
    plan.color = ci;
    plan.role[xi] = plan.role[ci] = Role::dimension;
    plan.mark = dim_mark(xi, true);
    plan.y = Plan::kCount;
  } else if (nq == 2 && nd == 1) {
    plan.x = q[0];
    plan.y = q[1];
    plan.color = d[0];
    if (rows > opt.scatter_row_limit || has_bins(q[0]) || has_bins(q[1])) {
      plan.mark = Mark::color_heatmap;
      plan.role[q[0]] = plan.role[q[1]] = Role::binned;
      plan.role[d[0]] = Role::dimension;
    } else {
      plan.mark = Mark::color_scatter;
    }
  } else if (nq == 1 && nd == 2) {
    auto [xi, ci] = order_dims(d[0], d[1]);
    plan.x = xi;
    plan.color = ci;
    plan.y = q[0];
    plan.role[xi] = plan.role[ci] = Role::dimension;
    plan.role[q[0]] = Role::measure;
    plan.mark = dim_mark(xi, true);
  } else if (nq == 3 && nd == 0) {
    plan.mark = Mark::color_heatmap;
    plan.x = q[0];
    plan.y = q[1];
    plan.color = q[2];
    plan.role[q[0]] = plan.role[q[1]] = Role::binned;
    plan.role[q[2]] = Role::measure;
  } else {
    throw InvalidArgument("no encoding rule for this combination of axes");
  }

  // Explicit channels win: move the axis there, swapping with the occupant.
  for (std::size_t i = 0; i < p.axes.size(); ++i) {
    if (!p.axes[i].channel) continue;
    int ai = static_cast<int>(i);
    int* target = *p.axes[i].channel == Channel::x ? &plan.x : *p.axes[i].channel == Channel::y ? &plan.y : &plan.color;
    int* current = plan.x == ai ? &plan.x : plan.y == ai ? &plan.y : &plan.color;
    std::swap(*target, *current);
  }
  return plan;
}

}  // namespace

std::optional<PartialVisSpec> lookup_defaults(const PartialVisSpec& partial, const MetadataSet& meta,
                                              std::vector<std::string>* diagnostics) {
  auto reject = [&](std::string why) -> std::optional<PartialVisSpec> {
    if (diagnostics) diagnostics->push_back(std::move(why));
    return std::nullopt;
  };
  auto label = [&] {
    std::string s;
    for (const auto& a : partial.axes) s += (s.empty() ? "" : ", ") + a.attribute;
    return "[" + s + "]";
  };
  if (partial.axes.empty()) return reject(label() + ": no axes");
  if (partial.axes.size() > kMaxAxes) return reject(label() + ": more than 3 axes");
  for (const auto& f : partial.filters)
    if (!meta.find(f.column)) return reject(label() + ": unknown filter column " + quote(f.column));

  PartialVisSpec out = partial;
  std::size_t wide_nominal = 0, temporal = 0, quantitative = 0;
  for (auto& a : out.axes) {
    const auto* m = meta.find(a.attribute);
    if (!m) return reject(label() + ": unknown column " + quote(a.attribute));
    if (m->cardinality == 0) return reject(label() + ": " + quote(a.attribute) + " has no non-null values");
    a.type = m->semantic;
    if (m->semantic == SemanticType::quantitative && m->storage == StorageType::string)
      return reject(label() + ": " + quote(a.attribute) + " is text and cannot be quantitative");
    if (m->semantic == SemanticType::nominal && m->cardinality > kNominalCardinality) ++wide_nominal;
    if (m->semantic == SemanticType::temporal) ++temporal;
    if (m->semantic == SemanticType::quantitative) ++quantitative;
    if (m->semantic == SemanticType::temporal && a.channel == Channel::color)
      return reject(label() + ": temporal attribute on color");
  }
  if (wide_nominal >= 2) return reject(label() + ": two nominal axes with cardinality above 40");
  if (out.axes.size() == 3 && quantitative == 0) return reject(label() + ": three axes without a measure");
  if (temporal >= 2) return reject(label() + ": temporal attribute on color");
  auto plan = plan_for(out, meta, meta.rows, EncodingOptions{});
  if (plan.color >= 0 && out.axes[plan.color].type == SemanticType::temporal)
    return reject(label() + ": temporal attribute on color");
  return out;
}

// ---------------------------------------------------------------------------
// Encoding

TimeUnit temporal_unit(double lo, double hi) {
  auto a = civil_from(DateTime{static_cast<std::int64_t>(std::floor(lo))});
  auto b = civil_from(DateTime{static_cast<std::int64_t>(std::floor(hi))});
  if (a.year != b.year) return TimeUnit::year;
  if (a.month != b.month) return TimeUnit::month;
  return TimeUnit::day;
}

std::string time_bucket(DateTime t, TimeUnit unit) {
  auto c = civil_from(t);
  char buf[32];
  switch (unit) {
    case TimeUnit::year: std::snprintf(buf, sizeof buf, "%04d", c.year); break;
    case TimeUnit::month: std::snprintf(buf, sizeof buf, "%04d-%02u", c.year, c.month); break;
    case TimeUnit::day: std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", c.year, c.month, c.day); break;
  }
  return buf;
}

std::optional<std::pair<double, double>> temporal_extent(const ColumnMetadata& m) {
  if (m.storage == StorageType::datetime && m.min && m.max) return std::pair{*m.min, *m.max};
  std::optional<std::pair<double, double>> ext;
  for (const auto& u : m.unique_values) {
    std::optional<DateTime> t;
    if (auto* s = std::get_if<std::string>(&u)) t = parse_iso_datetime(*s);
    else if (auto* d = std::get_if<DateTime>(&u)) t = *d;
    if (!t) continue;
    double v = static_cast<double>(t->seconds);
    if (!ext) ext = std::pair{v, v};
    ext->first = std::min(ext->first, v);
    ext->second = std::max(ext->second, v);
  }
  return ext;
}

namespace {

std::pair<double, double> bin_extent(const ColumnMetadata& m) {
  double lo = m.min.value_or(0.0), hi = m.max.value_or(lo);
  if (!(hi > lo)) return {lo - 0.5, lo + 0.5};
  return {lo, hi};
}

}  // namespace

CompiledVisSpec infer_encoding(const PartialVisSpec& partial, const MetadataSet& meta, std::size_t row_count,
                               const EncodingOptions& opt) {
  using Role = Plan::Role;
  auto plan = plan_for(partial, meta, row_count, opt);
  CompiledVisSpec out;
  out.mark = plan.mark;
  out.filters = partial.filters;

  auto make = [&](int i, bool heat) {
    const auto& a = partial.axes[i];
    const auto& m = meta.at(a.attribute);
    Encoding e;
    e.field = a.attribute;
    e.type = type_of(a, meta);
    e.bins = a.bin_size;
    e.explicit_aggregate = a.aggregation.has_value();
    switch (plan.role[i]) {
      case Role::measure:
        e.aggregate = a.aggregation.value_or(Aggregation::mean);
        e.type = SemanticType::quantitative;
        break;
      case Role::binned:
        e.aggregate = a.aggregation.value_or(Aggregation::none);
        e.bins = a.bin_size.value_or(heat ? opt.heatmap_bins : opt.histogram_bins);
        e.extent = bin_extent(m);
        break;
      case Role::dimension:
        // Grouping keys are never aggregated; an explicit request is dropped.
        e.aggregate = Aggregation::none;
        break;
      case Role::raw:
        e.aggregate = a.aggregation.value_or(Aggregation::none);
        break;
    }
    if (e.type == SemanticType::temporal) {
      if (auto ext = temporal_extent(m)) e.time_unit = temporal_unit(ext->first, ext->second);
      else e.time_unit = TimeUnit::day;
    }
    return e;
  };
  auto count = [] {
    Encoding e;
    e.aggregate = Aggregation::count;
    e.type = SemanticType::quantitative;
    return e;
  };
  bool heat = plan.mark == Mark::heatmap || plan.mark == Mark::color_heatmap;
  auto fill = [&](int slot, std::optional<Encoding>& e) {
    if (slot >= 0) e = make(slot, heat);
    else if (slot == Plan::kCount) e = count();
  };
  fill(plan.x, out.x);
  fill(plan.y, out.y);
  fill(plan.color, out.color);

  if (out.mark == Mark::bar || out.mark == Mark::color_bar) {
    const Encoding* dim = nullptr;
    for (const auto* e : {&out.x, &out.y})
      if (*e && !(*e)->is_measure() && !(*e)->is_count()) dim = &**e;
    if (dim) {
      out.sort_descending = true;
      if (meta.at(dim->field).cardinality > opt.top_categories) out.top_categories = opt.top_categories;
    }
  }
  return out;
}

std::vector<CompiledVisSpec> compile_intent(const IntentSpec& intent, const MetadataSet& meta,
                                            std::vector<std::string>* diagnostics, const EncodingOptions& options) {
  std::vector<CompiledVisSpec> out;
  for (const auto& p : expand_intent(intent, meta)) {
    if (auto valid = lookup_defaults(p, meta, diagnostics)) out.push_back(infer_encoding(*valid, meta, meta.rows, options));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::string> CompiledVisSpec::attributes() const {
  std::vector<std::string> out;
  if (structure != StructureKind::none) return out;
  for (const auto* e : {&x, &y, &color})
    if (*e && !(*e)->field.empty()) out.push_back((*e)->field);
  return out;
}

std::vector<std::string> CompiledVisSpec::sort_key() const {
  auto out = attributes();
  if (structure != StructureKind::none) out.push_back(structure_label);
  for (const auto& f : filters) out.push_back(f.column + std::string(to_string(f.op)) + f.value);
  return out;
}

std::string CompiledVisSpec::title() const {
  std::string t;
  if (structure == StructureKind::row_wise) t = structure_label;
  else if (structure == StructureKind::column_wise) t = structure_label;
  else {
    for (const auto* e : {&x, &y, &color}) {
      if (!*e || (*e)->field.empty()) continue;
      if (!t.empty()) t += " vs ";
      if ((*e)->is_measure()) t += std::string(to_string((*e)->aggregate)) + "(" + (*e)->field + ")";
      else t += (*e)->field;
    }
  }
  for (std::size_t i = 0; i < filters.size(); ++i) {
    t += i == 0 ? " | " : ", ";
    t += filters[i].column + " " + std::string(to_string(filters[i].op)) + " " + filters[i].value;
  }
  return t;
}

}  // namespace luxen
