#include "luxen/vis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace luxen {

const VisColumn* VisData::find(std::string_view name) const noexcept {
  for (const auto& c : columns)
    if (c.name == name) return &c;
  return nullptr;
}

int bin_index(double v, double lo, double hi, int bins) noexcept {
  if (bins <= 1 || !(hi > lo)) return 0;
  if (v <= lo) return 0;
  if (v >= hi) return bins - 1;
  int b = static_cast<int>((v - lo) / (hi - lo) * bins);
  return std::clamp(b, 0, bins - 1);
}

std::string dimension_label(const Column& column, std::size_t row, const Encoding& enc) {
  if (enc.type == SemanticType::temporal && enc.time_unit) {
    if (column.type() == StorageType::datetime) return time_bucket(DateTime{column.int_data()[row]}, *enc.time_unit);
    if (column.type() == StorageType::string)
      if (auto t = parse_iso_datetime(column.text(row))) return time_bucket(*t, *enc.time_unit);
  }
  return column.format(row);
}

double mark_weight(Mark mark) noexcept {
  switch (mark) {
    case Mark::scatter: return 1.0;
    case Mark::color_scatter: return 1.5;
    case Mark::bar:
    case Mark::line: return 2.0;
    case Mark::color_bar:
    case Mark::color_line: return 3.0;
    case Mark::histogram: return 2.0;
    case Mark::heatmap: return 4.0;
    case Mark::color_heatmap: return 6.0;
    case Mark::map: return 2.0;
  }
  return 1.0;
}

double estimate_vis_cost(const CompiledVisSpec& spec, std::size_t rows) {
  double n = static_cast<double>(rows);
  return n * mark_weight(spec.mark) + 0.5 * n * static_cast<double>(spec.filters.size());
}

std::vector<std::uint32_t> vis_rows(const CompiledVisSpec& spec, const FrameData& data,
                                    const std::vector<std::uint32_t>* within) {
  std::vector<std::uint32_t> rows;
  if (spec.filters.empty()) {
    if (within) rows = *within;
    else {
      rows.resize(data.rows);
      std::iota(rows.begin(), rows.end(), 0u);
    }
  } else {
    rows = matching_rows(data, spec.filters, within);
  }
  std::vector<const Column*> cols;
  for (const auto& a : spec.attributes()) cols.push_back(&data.column(a));
  std::erase_if(rows, [&](std::uint32_t r) {
    for (const auto* c : cols) {
      if (c->is_null(r)) return true;
      if (c->type() == StorageType::floating && std::isnan(c->float_data()[r])) return true;
    }
    return false;
  });
  return rows;
}

namespace {

struct Accumulator {
  std::size_t n = 0;
  double mean = 0, m2 = 0, sum = 0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    ++n;
    sum += v;
    double d = v - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (v - mean);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void add_count() { ++n; }

  double result(Aggregation agg) const {
    switch (agg) {
      case Aggregation::count: return static_cast<double>(n);
      case Aggregation::sum: return sum;
      case Aggregation::mean:
      case Aggregation::none: return n ? sum / static_cast<double>(n) : std::nan("");
      case Aggregation::min: return n ? lo : std::nan("");
      case Aggregation::max: return n ? hi : std::nan("");
      case Aggregation::variance: return n > 1 ? m2 / static_cast<double>(n - 1) : std::nan("");
    }
    return std::nan("");
  }
};

/// Dictionary encoding of one dimension over a row list.
struct DimIndex {
  std::vector<std::uint32_t> code;  // per position in the row list
  std::vector<std::uint32_t> rep;   // representative source row per code
  std::vector<std::string> labels;
  std::vector<std::uint32_t> rank;  // natural-order rank per code
};

DimIndex index_dimension(const Column& col, const Encoding& enc, const std::vector<std::uint32_t>& rows) {
  DimIndex d;
  d.code.resize(rows.size());
  bool temporal = enc.type == SemanticType::temporal && enc.time_unit;
  auto intern = [&](auto& map, auto key, std::uint32_t row) {
    auto [it, fresh] = map.try_emplace(key, static_cast<std::uint32_t>(d.rep.size()));
    if (fresh) d.rep.push_back(row);
    return it->second;
  };
  if (col.type() == StorageType::string && !temporal) {
    std::unordered_map<std::string_view, std::uint32_t> map;
    for (std::size_t i = 0; i < rows.size(); ++i) d.code[i] = intern(map, std::string_view(col.text(rows[i])), rows[i]);
  } else if (col.type() == StorageType::floating) {
    std::unordered_map<double, std::uint32_t> map;
    for (std::size_t i = 0; i < rows.size(); ++i) d.code[i] = intern(map, col.float_data()[rows[i]], rows[i]);
  } else if (col.type() != StorageType::string && !temporal) {
    std::unordered_map<std::int64_t, std::uint32_t> map;
    for (std::size_t i = 0; i < rows.size(); ++i) d.code[i] = intern(map, col.int_data()[rows[i]], rows[i]);
  } else if (col.type() == StorageType::datetime) {
    // Label once per distinct instant, then intern the labels.
    std::unordered_map<std::int64_t, std::uint32_t> raw;
    std::vector<std::uint32_t> raw_code;
    std::unordered_map<std::string, std::uint32_t> map;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto [it, fresh] = raw.try_emplace(col.int_data()[rows[i]], static_cast<std::uint32_t>(raw_code.size()));
      if (fresh) raw_code.push_back(intern(map, dimension_label(col, rows[i], enc), rows[i]));
      d.code[i] = raw_code[it->second];
    }
  } else {
    std::unordered_map<std::string, std::uint32_t> map;
    for (std::size_t i = 0; i < rows.size(); ++i) d.code[i] = intern(map, dimension_label(col, rows[i], enc), rows[i]);
  }
  std::size_t n = d.rep.size();
  d.labels.resize(n);
  for (std::size_t c = 0; c < n; ++c) d.labels[c] = dimension_label(col, d.rep[c], enc);
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  if (temporal) {
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return d.labels[a] < d.labels[b]; });
  } else {
    std::vector<Cell> cells(n);
    for (std::size_t c = 0; c < n; ++c) cells[c] = col.cell(d.rep[c]);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return compare_cells(cells[a], cells[b]) < 0; });
  }
  d.rank.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.rank[order[i]] = static_cast<std::uint32_t>(i);
  return d;
}

bool numeric_encoding(const Encoding& e, const Column& c) {
  return e.type == SemanticType::quantitative && c.type() != StorageType::string;
}

VisColumn project(const Column& col, const Encoding& enc, const std::vector<std::uint32_t>& rows) {
  VisColumn out{enc.field, {}};
  if (numeric_encoding(enc, col)) {
    std::vector<double> v(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) v[i] = col.number(rows[i]);
    out.values = std::move(v);
  } else {
    std::vector<std::string> v(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) v[i] = dimension_label(col, rows[i], enc);
    out.values = std::move(v);
  }
  return out;
}

std::string count_name(const FrameData& data, const CompiledVisSpec& spec) {
  std::string name = kCountField;
  auto attrs = spec.attributes();
  while (std::find(attrs.begin(), attrs.end(), name) != attrs.end()) name += "_";
  (void)data;
  return name;
}

std::vector<const Encoding*> encodings(const CompiledVisSpec& spec) {
  std::vector<const Encoding*> out;
  for (const auto* e : {&spec.x, &spec.y, &spec.color})
    if (*e) out.push_back(&**e);
  return out;
}

VisData structure_data(const CompiledVisSpec& spec, const FrameData& data, const std::vector<std::uint32_t>* within) {
  VisData out;
  if (spec.structure == StructureKind::row_wise) {
    std::vector<std::string> labels;
    std::vector<double> values;
    std::size_t r = spec.structure_row;
    if (r >= data.rows) return out;
    if (within && !std::binary_search(within->begin(), within->end(), static_cast<std::uint32_t>(r))) return out;
    for (const auto& c : data.columns) {
      if (!c->is_numeric() || c->type() == StorageType::boolean || c->is_null(r)) continue;
      double v = c->number(r);
      if (std::isnan(v)) continue;
      labels.push_back(c->name());
      values.push_back(v);
    }
    out.source_rows = labels.empty() ? 0 : 1;
    out.columns.push_back({spec.x ? spec.x->field : "column", std::move(labels)});
    out.columns.push_back({spec.y ? spec.y->field : "value", std::move(values)});
    return out;
  }
  const auto& col = data.column(spec.structure_label);
  std::vector<std::string> labels;
  std::vector<double> values;
  auto visit = [&](std::size_t r) {
    if (col.is_null(r) || !col.is_numeric()) return;
    double v = col.number(r);
    if (std::isnan(v)) return;
    labels.push_back(data.row_label(r));
    values.push_back(v);
  };
  if (within) for (auto r : *within) visit(r);
  else for (std::size_t r = 0; r < data.rows; ++r) visit(r);
  out.source_rows = values.size();
  out.columns.push_back({spec.x ? spec.x->field : data.index_name(), std::move(labels)});
  out.columns.push_back({spec.y ? spec.y->field : col.name(), std::move(values)});
  return out;
}

}  // namespace

VisData process_vis(const CompiledVisSpec& spec, const FrameData& data, const std::vector<std::uint32_t>* within) {
  if (spec.structure != StructureKind::none) return structure_data(spec, data, within);

  auto rows = vis_rows(spec, data, within);
  VisData out;
  if (rows.empty()) return out;
  out.source_rows = rows.size();
  auto encs = encodings(spec);
  auto cname = count_name(data, spec);

  switch (spec.mark) {
    case Mark::scatter:
    case Mark::color_scatter: {
      for (const auto* e : encs)
        if (!e->is_count()) out.columns.push_back(project(data.column(e->field), *e, rows));
      return out;
    }
    case Mark::histogram:
    case Mark::heatmap:
    case Mark::color_heatmap: {
      std::vector<const Encoding*> binned;
      const Encoding* colour = nullptr;
      for (const auto* e : encs) {
        if (e->extent && e->bins && binned.size() < 2) binned.push_back(e);
        else if (!e->is_count()) colour = e;
      }
      if (binned.empty()) return out;
      std::vector<const Column*> cols;
      for (const auto* e : binned) cols.push_back(&data.column(e->field));
      std::vector<int> nb;
      for (const auto* e : binned) nb.push_back(std::max(1, *e->bins));
      std::size_t cells = 1;
      for (int b : nb) cells *= static_cast<std::size_t>(b);
      std::vector<std::size_t> counts(cells, 0);
      std::vector<Accumulator> acc;
      std::vector<std::unordered_map<std::uint32_t, std::size_t>> modes;
      const Column* ccol = colour ? &data.column(colour->field) : nullptr;
      bool colour_numeric = ccol && colour->is_measure() && numeric_encoding(*colour, *ccol);
      DimIndex cdim;
      if (ccol && colour_numeric) acc.resize(cells);
      else if (ccol) {
        cdim = index_dimension(*ccol, *colour, rows);
        modes.resize(cells);
      }
      for (std::size_t i = 0; i < rows.size(); ++i) {
        std::size_t cell = 0;
        for (std::size_t k = 0; k < binned.size(); ++k) {
          auto [lo, hi] = *binned[k]->extent;
          cell = cell * static_cast<std::size_t>(nb[k]) +
                 static_cast<std::size_t>(bin_index(cols[k]->number(rows[i]), lo, hi, nb[k]));
        }
        ++counts[cell];
        if (!acc.empty()) acc[cell].add(ccol->number(rows[i]));
        else if (!modes.empty()) ++modes[cell][cdim.code[i]];
      }
      auto edges = [&](std::size_t k, int b) {
        auto [lo, hi] = *binned[k]->extent;
        double w = (hi - lo) / nb[k];
        double start = lo + w * b;
        double end = b + 1 == nb[k] ? hi : lo + w * (b + 1);
        return std::pair{start, end};
      };
      if (spec.mark == Mark::histogram || binned.size() == 1) {
        std::vector<double> start, end, count;
        for (int b = 0; b < nb[0]; ++b) {
          auto [s, e] = edges(0, b);
          start.push_back(s);
          end.push_back(e);
          count.push_back(static_cast<double>(counts[static_cast<std::size_t>(b)]));
        }
        out.columns.push_back({binned[0]->field, std::move(start)});
        out.columns.push_back({binned[0]->field + kBinEndSuffix, std::move(end)});
        out.columns.push_back({cname, std::move(count)});
        return out;
      }
      std::vector<double> xs, xe, ys, ye, count, cvals;
      std::vector<std::string> clabels;
      for (int a = 0; a < nb[0]; ++a) {
        for (int b = 0; b < nb[1]; ++b) {
          std::size_t cell = static_cast<std::size_t>(a) * static_cast<std::size_t>(nb[1]) + static_cast<std::size_t>(b);
          if (counts[cell] == 0) continue;
          auto [x0, x1] = edges(0, a);
          auto [y0, y1] = edges(1, b);
          xs.push_back(x0);
          xe.push_back(x1);
          ys.push_back(y0);
          ye.push_back(y1);
          count.push_back(static_cast<double>(counts[cell]));
          if (!acc.empty()) cvals.push_back(acc[cell].result(colour->aggregate));
          else if (!modes.empty()) {
            std::uint32_t best = 0;
            std::size_t best_n = 0;
            for (auto [code, n] : modes[cell]) {
              if (n > best_n || (n == best_n && cdim.rank[code] < cdim.rank[best])) {
                best = code;
                best_n = n;
              }
            }
            clabels.push_back(cdim.labels[best]);
          }
        }
      }
      out.columns.push_back({binned[0]->field, std::move(xs)});
      out.columns.push_back({binned[0]->field + kBinEndSuffix, std::move(xe)});
      out.columns.push_back({binned[1]->field, std::move(ys)});
      out.columns.push_back({binned[1]->field + kBinEndSuffix, std::move(ye)});
      out.columns.push_back({cname, std::move(count)});
      if (!acc.empty()) out.columns.push_back({colour->field, std::move(cvals)});
      else if (!modes.empty()) out.columns.push_back({colour->field, std::move(clabels)});
      return out;
    }
    case Mark::bar:
    case Mark::color_bar:
    case Mark::line:
    case Mark::color_line:
    case Mark::map: {
      std::vector<const Encoding*> dims;
      const Encoding* measure = nullptr;
      for (const auto* e : encs) {
        if (e->is_count() || e->is_measure()) measure = e;
        else dims.push_back(e);
      }
      // Dimension on the primary axis first, then colour.
      std::vector<DimIndex> index;
      for (const auto* e : dims) index.push_back(index_dimension(data.column(e->field), *e, rows));
      std::size_t width = index.size() == 2 ? index[1].rep.size() : 1;
      std::unordered_map<std::uint64_t, std::size_t> groups;
      std::vector<std::uint64_t> keys;
      std::vector<Accumulator> acc;
      const Column* mcol = measure && !measure->is_count() ? &data.column(measure->field) : nullptr;
      if (mcol && !mcol->is_numeric()) mcol = nullptr;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        std::uint64_t key = 0;
        if (index.size() >= 1) key = index[0].code[i];
        if (index.size() == 2) key = key * width + index[1].code[i];
        auto [it, fresh] = groups.try_emplace(key, acc.size());
        if (fresh) {
          acc.emplace_back();
          keys.push_back(key);
        }
        if (mcol) acc[it->second].add(mcol->number(rows[i]));
        else acc[it->second].add_count();
      }
      Aggregation agg = mcol ? measure->aggregate : Aggregation::count;
      std::vector<double> value(acc.size());
      for (std::size_t g = 0; g < acc.size(); ++g) value[g] = acc[g].result(agg);
      auto part = [&](std::uint64_t key, std::size_t d) -> std::uint32_t {
        if (index.size() == 2) return static_cast<std::uint32_t>(d == 0 ? key / width : key % width);
        return static_cast<std::uint32_t>(key);
      };
      std::vector<std::size_t> order(acc.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      auto natural = [&](std::size_t a, std::size_t b) {
        for (std::size_t d = 0; d < index.size(); ++d) {
          auto ra = index[d].rank[part(keys[a], d)], rb = index[d].rank[part(keys[b], d)];
          if (ra != rb) return ra < rb;
        }
        return false;
      };
      std::sort(order.begin(), order.end(), natural);
      if (spec.sort_descending && !index.empty()) {
        // Rank primary categories by measure (summed across colour groups).
        std::vector<double> total(index[0].rep.size(), 0.0);
        for (std::size_t g = 0; g < acc.size(); ++g) {
          double v = value[g];
          if (!std::isnan(v)) total[part(keys[g], 0)] += v;
        }
        std::vector<std::uint32_t> cats(total.size());
        std::iota(cats.begin(), cats.end(), 0u);
        std::stable_sort(cats.begin(), cats.end(), [&](auto a, auto b) {
          if (total[a] != total[b]) return total[a] > total[b];
          return index[0].rank[a] < index[0].rank[b];
        });
        std::vector<std::uint32_t> cat_rank(cats.size());
        for (std::size_t i = 0; i < cats.size(); ++i) cat_rank[cats[i]] = static_cast<std::uint32_t>(i);
        std::stable_sort(order.begin(), order.end(),
                         [&](auto a, auto b) { return cat_rank[part(keys[a], 0)] < cat_rank[part(keys[b], 0)]; });
        if (spec.top_categories) {
          std::size_t limit = *spec.top_categories;
          std::erase_if(order, [&](std::size_t g) { return cat_rank[part(keys[g], 0)] >= limit; });
        }
      }
      for (std::size_t d = 0; d < dims.size(); ++d) {
        std::vector<std::string> labels;
        labels.reserve(order.size());
        for (auto g : order) labels.push_back(index[d].labels[part(keys[g], d)]);
        out.columns.push_back({dims[d]->field, std::move(labels)});
      }
      std::vector<double> vals;
      vals.reserve(order.size());
      for (auto g : order) vals.push_back(value[g]);
      out.columns.push_back({mcol ? measure->field : cname, std::move(vals)});
      return out;
    }
  }
  return out;
}

}  // namespace luxen
