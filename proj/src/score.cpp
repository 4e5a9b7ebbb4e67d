#include "luxen/score.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "luxen/stats.hpp"
#include "luxen/vis.hpp"

namespace luxen {

std::string_view to_string(ScoreKind k) noexcept {
  switch (k) {
    case ScoreKind::correlation: return "correlation";
    case ScoreKind::distribution: return "distribution";
    case ScoreKind::occurrence: return "occurrence";
    case ScoreKind::temporal: return "temporal";
    case ScoreKind::geographic: return "geographic";
    case ScoreKind::enhance: return "enhance";
    case ScoreKind::filter: return "filter";
    case ScoreKind::none: return "none";
  }
  return "none";
}

namespace {

struct PairMoments {
  std::size_t n = 0;
  double sx = 0, sy = 0;
};

std::optional<double> finish_pearson(double sxx, double syy, double sxy) {
  if (!(sxx > 0) || !(syy > 0)) return std::nullopt;
  double r = sxy / std::sqrt(sxx * syy);
  if (std::isnan(r)) return std::nullopt;
  return std::clamp(r, -1.0, 1.0);
}

template <class Fn>
void for_rows(std::size_t total, const std::vector<std::uint32_t>* rows, Fn&& fn) {
  if (rows) for (auto r : *rows) fn(r);
  else for (std::size_t r = 0; r < total; ++r) fn(r);
}

bool usable(const Column& c, std::size_t r) {
  if (c.is_null(r)) return false;
  return c.type() != StorageType::floating || !std::isnan(c.float_data()[r]);
}

std::optional<double> skew_finish(std::size_t n, double m2, double m3) {
  if (n < 3 || !(m2 > 0)) return std::nullopt;
  double nn = static_cast<double>(n);
  double g1 = (m3 / nn) / std::pow(m2 / nn, 1.5);
  double r = g1 * std::sqrt(nn * (nn - 1)) / (nn - 2);
  if (!std::isfinite(r)) return std::nullopt;
  return r;
}

}  // namespace

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  std::size_t n = std::min(x.size(), y.size());
  PairMoments m;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(x[i]) || std::isnan(y[i])) continue;
    ++m.n;
    m.sx += x[i];
    m.sy += y[i];
  }
  if (m.n < 2) return std::nullopt;
  double mx = m.sx / static_cast<double>(m.n), my = m.sy / static_cast<double>(m.n);
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(x[i]) || std::isnan(y[i])) continue;
    double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  return finish_pearson(sxx, syy, sxy);
}

std::optional<double> skewness(std::span<const double> x) {
  std::size_t n = 0;
  double s = 0;
  for (double v : x)
    if (!std::isnan(v)) ++n, s += v;
  if (n < 3) return std::nullopt;
  double mean = s / static_cast<double>(n), m2 = 0, m3 = 0;
  for (double v : x) {
    if (std::isnan(v)) continue;
    double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  return skew_finish(n, m2, m3);
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    double d = (i < a.size() ? a[i] : 0.0) - (i < b.size() ? b[i] : 0.0);
    s += d * d;
  }
  return std::sqrt(s);
}

std::vector<double> normalize(std::vector<double> w) {
  double total = 0;
  for (double v : w) total += v;
  if (total > 0)
    for (double& v : w) v /= total;
  return w;
}

double deviation_from_uniform(std::span<const double> values) {
  std::vector<double> w;
  for (double v : values)
    if (!std::isnan(v)) w.push_back(std::abs(v));
  if (w.size() < 2) return 0.0;
  w = normalize(std::move(w));
  double u = 1.0 / static_cast<double>(w.size());
  double s = 0;
  for (double v : w) s += (v - u) * (v - u);
  return std::sqrt(s);
}

namespace {

template <class T>
bool cell_ok(std::span<const T> v, std::span<const std::uint8_t> valid, std::size_t r) {
  if (!valid[r]) return false;
  if constexpr (std::is_floating_point_v<T>) return !std::isnan(v[r]);
  return true;
}

template <class A, class B>
std::optional<double> pearson_typed(std::span<const A> xa, std::span<const B> xb, std::span<const std::uint8_t> va,
                                    std::span<const std::uint8_t> vb, const std::vector<std::uint32_t>* rows) {
  PairMoments m;
  for_rows(xa.size(), rows, [&](std::size_t r) {
    if (!cell_ok(xa, va, r) || !cell_ok(xb, vb, r)) return;
    ++m.n;
    m.sx += static_cast<double>(xa[r]);
    m.sy += static_cast<double>(xb[r]);
  });
  if (m.n < 2) return std::nullopt;
  double mx = m.sx / static_cast<double>(m.n), my = m.sy / static_cast<double>(m.n);
  double sxx = 0, syy = 0, sxy = 0;
  for_rows(xa.size(), rows, [&](std::size_t r) {
    if (!cell_ok(xa, va, r) || !cell_ok(xb, vb, r)) return;
    double dx = static_cast<double>(xa[r]) - mx, dy = static_cast<double>(xb[r]) - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  });
  return finish_pearson(sxx, syy, sxy);
}

template <class T>
std::optional<double> skewness_typed(std::span<const T> x, std::span<const std::uint8_t> valid,
                                     const std::vector<std::uint32_t>* rows) {
  std::size_t n = 0;
  double s = 0;
  for_rows(x.size(), rows, [&](std::size_t r) {
    if (!cell_ok(x, valid, r)) return;
    ++n;
    s += static_cast<double>(x[r]);
  });
  if (n < 3) return std::nullopt;
  double mean = s / static_cast<double>(n), m2 = 0, m3 = 0;
  for_rows(x.size(), rows, [&](std::size_t r) {
    if (!cell_ok(x, valid, r)) return;
    double d = static_cast<double>(x[r]) - mean;
    m2 += d * d;
    m3 += d * d * d;
  });
  return skew_finish(n, m2, m3);
}

}  // namespace

std::optional<double> pearson_columns(const Column& a, const Column& b, const std::vector<std::uint32_t>* rows) {
  if (!a.is_numeric() || !b.is_numeric()) return std::nullopt;
  return with_numeric(a, [&](auto xa) {
    return with_numeric(b, [&](auto xb) { return pearson_typed(xa, xb, a.validity(), b.validity(), rows); });
  });
}

std::optional<double> skewness_column(const Column& a, const std::vector<std::uint32_t>* rows) {
  if (!a.is_numeric()) return std::nullopt;
  return with_numeric(a, [&](auto x) { return skewness_typed(x, a.validity(), rows); });
}

namespace {

bool is_quantitative(const ColumnMetadata* m, const Column& c) {
  return m && m->semantic == SemanticType::quantitative && c.is_numeric();
}

const ColumnMetadata* meta_of(const ScoreContext& ctx, std::string_view name) {
  return ctx.meta ? ctx.meta->find(name) : nullptr;
}

/// Normalized distribution of one attribute over `rows`: 10 bins over `extent`
/// for quantitative columns, category frequencies (keyed by label) otherwise.
std::map<std::string, double> distribution(const Column& c, bool quantitative, std::pair<double, double> extent,
                                           const std::vector<std::uint32_t>& rows) {
  std::map<std::string, double> out;
  constexpr int kBins = 10;
  double total = 0;
  for (auto r : rows) {
    if (!usable(c, r)) continue;
    std::string key;
    if (quantitative) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "%02d", bin_index(c.number(r), extent.first, extent.second, kBins));
      key = buf;
    } else {
      key = c.format(r);
    }
    out[key] += 1;
    total += 1;
  }
  if (total > 0)
    for (auto& [k, v] : out) v /= total;
  return out;
}

double filter_score(const CompiledVisSpec& spec, const FrameData& data, const ScoreContext& ctx,
                    const std::vector<std::uint32_t>* within) {
  const CompiledVisSpec& base = *ctx.base;
  auto before = matching_rows(data, base.filters, within);
  auto after = matching_rows(data, spec.filters, within);
  if (before.empty() || after.empty()) return 0.0;
  auto attrs = base.attributes();
  if (attrs.empty()) return 0.0;
  double sum = 0;
  for (const auto& a : attrs) {
    const auto& col = data.column(a);
    const auto* m = meta_of(ctx, a);
    bool q = is_quantitative(m, col);
    std::pair<double, double> ext{0, 1};
    if (q && m->min && m->max) ext = {*m->min, *m->max};
    auto p = distribution(col, q, ext, before);
    auto f = distribution(col, q, ext, after);
    std::vector<double> pv, fv;
    for (const auto& [k, v] : p) {
      pv.push_back(v);
      auto it = f.find(k);
      fv.push_back(it == f.end() ? 0.0 : it->second);
    }
    for (const auto& [k, v] : f)
      if (!p.count(k)) pv.push_back(0.0), fv.push_back(v);
    sum += euclidean_distance(pv, fv);
  }
  return sum / static_cast<double>(attrs.size());
}

double enhance_score(const CompiledVisSpec& spec, const FrameData& data, const ScoreContext& ctx,
                     const std::vector<std::uint32_t>* within) {
  const CompiledVisSpec& base = *ctx.base;
  std::vector<std::uint32_t> filtered;
  const std::vector<std::uint32_t>* rows = within;
  if (!spec.filters.empty()) {
    filtered = matching_rows(data, spec.filters, within);
    rows = &filtered;
  }
  const auto& added = data.column(ctx.added);
  bool added_q = is_quantitative(meta_of(ctx, ctx.added), added);
  std::vector<std::string> base_q, base_d;
  for (const auto& a : base.attributes())
    (is_quantitative(meta_of(ctx, a), data.column(a)) ? base_q : base_d).push_back(a);

  if (added_q && !base_q.empty()) {
    double best = 0;
    for (const auto& q : base_q)
      if (auto r = pearson_columns(added, data.column(q), rows)) best = std::max(best, std::abs(*r));
    return best;
  }
  std::string group = added_q ? (base_d.empty() ? "" : base_d.front()) : ctx.added;
  std::string measure = added_q ? ctx.added : (base_q.empty() ? "" : base_q.front());
  if (group.empty()) return 0.0;
  const auto& gcol = data.column(group);
  const Column* mcol = measure.empty() ? nullptr : &data.column(measure);
  std::unordered_map<std::string, std::pair<double, std::size_t>> acc;
  for_rows(data.rows, rows, [&](std::size_t r) {
    if (!usable(gcol, r) || (mcol && !usable(*mcol, r))) return;
    auto& [s, n] = acc[gcol.format(r)];
    s += mcol ? mcol->number(r) : 1.0;
    ++n;
  });
  std::vector<std::pair<std::string, double>> values;
  for (const auto& [k, v] : acc) values.emplace_back(k, mcol ? v.first / static_cast<double>(v.second) : v.first);
  std::sort(values.begin(), values.end());
  std::vector<double> vs;
  for (const auto& [k, v] : values) vs.push_back(v);
  return deviation_from_uniform(vs);
}

}  // namespace

std::optional<double> interestingness(const CompiledVisSpec& spec, const FrameData& data, const ScoreContext& ctx,
                                      const std::vector<std::uint32_t>* within) {
  stats().scoring_operations++;
  switch (ctx.kind) {
    case ScoreKind::correlation: {
      if (!spec.x || !spec.y || spec.x->field.empty() || spec.y->field.empty()) return std::nullopt;
      std::vector<std::uint32_t> filtered;
      const std::vector<std::uint32_t>* rows = within;
      if (!spec.filters.empty()) {
        filtered = matching_rows(data, spec.filters, within);
        rows = &filtered;
      }
      auto r = pearson_columns(data.column(spec.x->field), data.column(spec.y->field), rows);
      if (!r) return std::nullopt;
      return std::abs(*r);
    }
    case ScoreKind::distribution: {
      auto attrs = spec.attributes();
      if (attrs.empty()) return 0.0;
      std::vector<std::uint32_t> filtered;
      const std::vector<std::uint32_t>* rows = within;
      if (!spec.filters.empty()) {
        filtered = matching_rows(data, spec.filters, within);
        rows = &filtered;
      }
      auto s = skewness_column(data.column(attrs.front()), rows);
      return s ? std::abs(*s) : 0.0;
    }
    case ScoreKind::enhance:
      if (!ctx.base || ctx.added.empty()) return 0.0;
      return enhance_score(spec, data, ctx, within);
    case ScoreKind::filter:
      if (!ctx.base) return 0.0;
      return filter_score(spec, data, ctx, within);
    case ScoreKind::occurrence:
    case ScoreKind::temporal:
    case ScoreKind::geographic:
    case ScoreKind::none: return 0.0;
  }
  return 0.0;
}

}  // namespace luxen
