// Acceptance driver: one pass/fail line per criterion, nonzero exit on failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "luxen/bench.hpp"
#include "luxen/csv.hpp"
#include "luxen/recommender.hpp"
#include "luxen/score.hpp"
#include "luxen/server.hpp"
#include "luxen/spec_doc.hpp"
#include "luxen/stats.hpp"
#include "oracles.hpp"
#include "support/random_data.hpp"

using namespace luxen;
using luxen::testing::ColumnShape;
using luxen::testing::FrameShape;
using luxen::testing::Gen;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::shared_ptr<const Column> make_col(Column c) { return std::make_shared<const Column>(std::move(c)); }

// ---------------------------------------------------------------------------
// 1. Intent expansion against brute force

FrameData people_frame() {
  const std::size_t n = 200;
  std::vector<std::string> edu(n), dept(n), name(n);
  std::vector<std::int64_t> hourly(n), daily(n), monthly(n), age(n), hired(n);
  std::vector<double> score(n), empty(n, 0.0);
  const std::vector<std::string> fields{"Life Sciences", "Medical", "Marketing", "Technical Degree", "Other"};
  const std::vector<std::string> depts{"Sales", "Research", "Human Resources"};
  for (std::size_t i = 0; i < n; ++i) {
    edu[i] = fields[(i * 7) % fields.size()];
    dept[i] = depts[(i * 3 + i / 5) % depts.size()];
    name[i] = "person" + std::to_string(i % 150);
    hourly[i] = 30 + static_cast<std::int64_t>((i * 37) % 71);
    daily[i] = 100 + static_cast<std::int64_t>((i * 131) % 1400);
    monthly[i] = 1000 + static_cast<std::int64_t>((i * 977) % 19000);
    age[i] = 18 + static_cast<std::int64_t>(i % 48);
    score[i] = std::sin(static_cast<double>(i)) * 10 + static_cast<double>(i % 13);
    hired[i] = 1262304000 + static_cast<std::int64_t>((i * 17) % 900) * 86400;
  }
  FrameData d;
  d.rows = n;
  d.columns = {make_col(Column::strings("EducationField", edu)), make_col(Column::strings("Department", dept)),
               make_col(Column::strings("Name", name)),          make_col(Column::integers("HourlyRate", hourly)),
               make_col(Column::integers("DailyRate", daily)),   make_col(Column::integers("MonthlyRate", monthly)),
               make_col(Column::integers("Age", age)),           make_col(Column::floats("Score", score)),
               make_col(Column::datetimes("Hired", hired)),
               make_col(Column::floats("Empty", empty, std::vector<std::uint8_t>(n, 0)))};
  d.history.push_back(HistoryEvent{HistoryKind::load, nlohmann::json::object(), 0});
  return d;
}

struct BruteAlt {
  bool axis = true;
  AxisSpec a;
  Comparison f;
};

using BruteKey = std::pair<std::vector<std::string>, std::vector<std::string>>;

std::string axis_key(const AxisSpec& a) {
  return a.attribute + "|" + std::to_string(a.channel ? static_cast<int>(*a.channel) : -1) + "|" +
         std::to_string(a.aggregation ? static_cast<int>(*a.aggregation) : -1) + "|" +
         std::to_string(a.bin_size.value_or(-1));
}

std::string filter_key(const Comparison& f) {
  return f.column + "|" + std::to_string(static_cast<int>(f.op)) + "|" + f.value;
}

BruteKey key_of(const std::vector<AxisSpec>& axes, const std::vector<Comparison>& filters) {
  BruteKey k;
  for (const auto& a : axes) k.first.push_back(axis_key(a));
  for (const auto& f : filters) k.second.push_back(filter_key(f));
  std::sort(k.first.begin(), k.first.end());
  std::sort(k.second.begin(), k.second.end());
  return k;
}

bool brute_valid(const std::vector<AxisSpec>& axes, const MetadataSet& meta) {
  if (axes.empty()) return false;
  std::size_t wide = 0, t = 0, q = 0;
  for (const auto& a : axes) {
    const auto& m = meta.at(a.attribute);
    if (m.cardinality == 0) return false;
    if (m.semantic == SemanticType::quantitative && m.storage == StorageType::string) return false;
    if (m.semantic == SemanticType::nominal && m.cardinality > 40) ++wide;
    if (m.semantic == SemanticType::temporal) ++t;
    if (m.semantic == SemanticType::quantitative) ++q;
    if (m.semantic == SemanticType::temporal && a.channel == Channel::color) return false;
  }
  if (wide >= 2 || t >= 2) return false;
  if (axes.size() == 3 && q == 0) return false;
  if (axes.size() == 3 && q == 2 && t == 1) return false;  // the temporal axis would land on color
  return true;
}

struct BruteCounts {
  std::set<BruteKey> keys;
  std::size_t valid = 0;
};

BruteCounts brute_expand(const IntentSpec& intent, const MetadataSet& meta) {
  std::vector<std::vector<BruteAlt>> lists;
  for (const auto& c : intent.clauses) {
    std::vector<std::string> attrs;
    if (c.attribute.wildcard) {
      for (const auto& m : meta.columns)
        if (!c.attribute.constraint || m.semantic == *c.attribute.constraint) attrs.push_back(m.name);
    } else {
      for (const auto& n : c.attribute.names)
        if (meta.find(n)) attrs.push_back(n);
    }
    std::vector<BruteAlt> alts;
    for (const auto& a : attrs) {
      if (c.kind == ClauseKind::axis) {
        BruteAlt x;
        x.a = AxisSpec{a, c.channel, c.aggregation, c.bin_size, {}};
        alts.push_back(x);
        continue;
      }
      std::vector<std::string> values = c.value.values;
      if (c.value.wildcard) {
        values.clear();
        for (const auto& u : meta.at(a).unique_values) values.push_back(format_cell(u));
      }
      for (const auto& v : values) {
        BruteAlt x;
        x.axis = false;
        x.f = Comparison{a, c.op.value_or(FilterOp::eq), v};
        alts.push_back(x);
      }
    }
    if (alts.empty() && !c.attribute.wildcard) continue;
    if (alts.empty()) return {};
    lists.push_back(std::move(alts));
  }
  BruteCounts out;
  if (lists.empty()) return out;
  std::vector<std::size_t> idx(lists.size(), 0);
  std::function<void(std::size_t, std::vector<AxisSpec>&, std::vector<Comparison>&)> rec =
      [&](std::size_t depth, std::vector<AxisSpec>& axes, std::vector<Comparison>& filters) {
        if (depth == lists.size()) {
          std::set<std::string> names;
          for (const auto& a : axes) names.insert(a.attribute);
          if (names.size() != axes.size() || axes.size() > 3) return;
          if (out.keys.insert(key_of(axes, filters)).second && brute_valid(axes, meta)) ++out.valid;
          return;
        }
        for (const auto& alt : lists[depth]) {
          if (alt.axis) axes.push_back(alt.a);
          else filters.push_back(alt.f);
          rec(depth + 1, axes, filters);
          if (alt.axis) axes.pop_back();
          else filters.pop_back();
        }
      };
  std::vector<AxisSpec> axes;
  std::vector<Comparison> filters;
  rec(0, axes, filters);
  return out;
}

IntentSpec random_people_intent(Gen& g) {
  const std::vector<std::string> names{"EducationField", "Department", "Name", "HourlyRate", "DailyRate",
                                       "MonthlyRate",    "Age",        "Score", "Hired",     "Empty", "Agee"};
  const std::vector<std::string> filterable{"EducationField", "Department", "Age", "HourlyRate"};
  const std::vector<std::string> values{"Sales", "Research", "Medical", "Other", "30", "40", "55", "2010-03-01"};
  IntentSpec intent;
  std::size_t n = g.between(1, 3);
  for (std::size_t i = 0; i < n; ++i) {
    ClauseSpec c;
    if (g.chance(0.25)) {
      c.kind = ClauseKind::filter;
      c.op = g.pick(std::vector<FilterOp>{FilterOp::eq, FilterOp::ne, FilterOp::gt, FilterOp::le});
      if (g.chance(0.3)) {
        c.attribute.names.push_back(g.pick(filterable));
        c.value.wildcard = true;
        c.op = FilterOp::eq;
      } else {
        std::size_t k = g.between(1, 2);
        for (std::size_t j = 0; j < k; ++j) c.attribute.names.push_back(g.pick(filterable));
        std::size_t m = g.between(1, 3);
        for (std::size_t j = 0; j < m; ++j) c.value.values.push_back(g.pick(values));
      }
    } else if (g.chance(0.3)) {
      c.attribute.wildcard = true;
      if (g.chance(0.6))
        c.attribute.constraint = g.pick(std::vector<SemanticType>{SemanticType::nominal, SemanticType::quantitative,
                                                                  SemanticType::temporal, SemanticType::geographic});
    } else {
      std::size_t k = g.between(1, 3);
      for (std::size_t j = 0; j < k; ++j) c.attribute.names.push_back(g.pick(names));
    }
    if (c.kind == ClauseKind::axis) {
      if (g.chance(0.2))
        c.aggregation = g.pick(std::vector<Aggregation>{Aggregation::mean, Aggregation::sum, Aggregation::max});
      if (g.chance(0.15)) c.bin_size = static_cast<int>(g.between(2, 30));
    }
    intent.clauses.push_back(std::move(c));
  }
  return intent;
}

Outcome intent_expansion() {
  auto data = people_frame();
  auto meta = compute_metadata(data);
  Outcome o;
  Gen g(11);
  std::size_t total = 0, mismatches = 0;
  for (int i = 0; i < 50; ++i) {
    auto intent = random_people_intent(g);
    auto brute = brute_expand(intent, meta);
    auto partials = expand_intent(intent, meta);
    auto compiled = compile_intent(intent, meta);
    std::set<BruteKey> got;
    for (const auto& p : partials) got.insert(key_of(p.axes, p.filters));
    bool ok = partials.size() == brute.keys.size() && got == brute.keys && compiled.size() == brute.valid;
    total += compiled.size();
    if (!ok) {
      ++mismatches;
      if (o.detail.size() < 400)
        o.detail += " intent#" + std::to_string(i) + " expand " + std::to_string(partials.size()) + "/" +
                    std::to_string(brute.keys.size()) + " compiled " + std::to_string(compiled.size()) + "/" +
                    std::to_string(brute.valid);
    }
  }
  IntentSpec q5 = parse_intent_list("EducationField,HourlyRate|DailyRate|MonthlyRate");
  auto q5_specs = compile_intent(q5, meta);
  bool q5_ok = q5_specs.size() == 3;
  o.pass = mismatches == 0 && q5_ok;
  o.detail = "50 intents, " + std::to_string(mismatches) + " mismatches, " + std::to_string(total) +
             " specs; union-of-3 gives " + std::to_string(q5_specs.size()) + o.detail;
  return o;
}

// ---------------------------------------------------------------------------
// 2. Ranking against exhaustive scoring

struct OracleEntry {
  std::optional<double> score;
  double hint = 0;
  std::vector<std::string> key;
  bool empty = false;
};

bool oracle_before(const OracleEntry& a, const OracleEntry& b) {
  if (a.score.has_value() != b.score.has_value()) return a.score.has_value();
  if (a.score && *a.score != *b.score) return *a.score > *b.score;
  if (a.hint != b.hint) return a.hint < b.hint;
  return a.key < b.key;
}

bool near_tie(const OracleEntry& a, const OracleEntry& b) {
  if (a.score.has_value() != b.score.has_value()) return false;
  if (!a.score) return true;
  return std::abs(*a.score - *b.score) <= 1e-12 * std::max(1.0, std::abs(*a.score));
}

std::optional<double> oracle_score(const std::string& action, const Candidate& c, std::size_t count,
                                   const FrameData& d, const MetadataSet& meta, const ActionContext& ctx) {
  const auto& s = c.spec;
  auto corr = [&]() -> std::optional<double> {
    auto r = oracle::pearson(d.column(s.x->field), d.column(s.y->field), oracle::filtered_rows(d, s.filters));
    if (!r) return std::nullopt;
    return std::abs(*r);
  };
  auto dist = [&]() -> std::optional<double> {
    auto attrs = s.attributes();
    if (attrs.empty()) return 0.0;
    auto g = oracle::skewness(d.column(attrs.front()), oracle::filtered_rows(d, s.filters));
    return g ? std::abs(*g) : 0.0;
  };
  if (action == actions::kCurrent) {
    if (count == 1) return std::nullopt;
    auto quant = [](const std::optional<Encoding>& e) {
      return e && !e->is_count() && !e->is_measure() && e->type == SemanticType::quantitative;
    };
    if ((s.mark == Mark::scatter || s.mark == Mark::heatmap) && quant(s.x) && quant(s.y)) return corr();
    if (s.mark == Mark::histogram) return dist();
    return 0.0;
  }
  if (action == actions::kCorrelation) return corr();
  if (action == actions::kDistribution) return dist();
  if (action == actions::kEnhance) return oracle::enhance_score(d, meta, ctx.base->spec, s, c.added);
  if (action == actions::kFilter) return oracle::filter_score(d, meta, ctx.base->spec, s);
  return 0.0;
}

std::set<std::string> expected_actions(const FrameData& d, const MetadataSet& meta, const ActionContext& ctx) {
  if (!ctx.intent_specs.empty()) {
    if (ctx.intent_specs.size() == 1) return {actions::kCurrent, actions::kEnhance, actions::kFilter};
    return {actions::kCurrent};
  }
  if (d.pre_aggregated) return {actions::kIndex};
  if (d.columns.size() == 1) return {actions::kSeries};
  std::map<SemanticType, std::size_t> n;
  for (const auto& m : meta.columns) {
    if (m.cardinality == 0) continue;
    if (m.semantic == SemanticType::quantitative && m.storage == StorageType::string) continue;
    ++n[m.semantic];
  }
  std::set<std::string> out;
  if (n[SemanticType::quantitative] >= 2) out.insert(actions::kCorrelation);
  if (n[SemanticType::quantitative] >= 1) out.insert(actions::kDistribution);
  if (n[SemanticType::nominal] >= 1) out.insert(actions::kOccurrence);
  if (n[SemanticType::temporal] >= 1) out.insert(actions::kTemporal);
  if (n[SemanticType::geographic] >= 1) out.insert(actions::kGeographic);
  return out;
}

FrameData ranking_frame(Gen& g, int variant) {
  auto d = luxen::testing::random_frame_data(g, FrameShape{1000, 12, 1, 1, true});
  auto meta = compute_metadata(d);
  std::vector<std::string> names = d.column_names();
  if (variant == 2 || variant == 3) {
    std::vector<std::string> values{"0", "10", "k1", "k3", "2010-01-05", "true", "-3.5"};
    for (const auto& m : meta.columns)
      for (std::size_t i = 0; i < std::min<std::size_t>(3, m.unique_values.size()); ++i)
        values.push_back(format_cell(m.unique_values[i]));
    IntentSpec intent;
    if (variant == 2) {
      std::size_t n = g.between(1, 2);
      for (std::size_t i = 0; i < n; ++i) {
        ClauseSpec c;
        c.attribute.names.push_back(g.pick(names));
        intent.clauses.push_back(c);
      }
      if (g.chance(0.4)) {
        ClauseSpec f;
        f.kind = ClauseKind::filter;
        f.op = FilterOp::eq;
        f.attribute.names.push_back(g.pick(names));
        f.value.values.push_back(g.pick(values));
        intent.clauses.push_back(f);
      }
    } else {
      std::size_t n = g.between(1, 2);
      for (std::size_t i = 0; i < n; ++i) {
        auto c = luxen::testing::random_clause(g, names, values);
        c.channel.reset();
        intent.clauses.push_back(c);
      }
    }
    d.intent = intent;
    d.intent_version = 1;
  }
  if (variant == 4) {
    std::optional<std::string> key, value;
    for (const auto& m : meta.columns) {
      if (!key && m.cardinality > 0 && m.cardinality <= 40 && m.semantic == SemanticType::nominal) key = m.name;
      else if (!value && m.semantic == SemanticType::quantitative && m.storage != StorageType::string) value = m.name;
    }
    if (key && value && g.chance(0.6)) {
      Transform t;
      t.op = GroupAggregate{{*key}, {{*value, Aggregation::mean}}};
      return transform_data(d, t);
    }
    FrameData s = d;
    s.columns.resize(1);
    return s;
  }
  return d;
}

Outcome ranking_oracle() {
  Outcome o;
  Gen g(2024);
  Registry registry;
  auto defaults = default_actions();
  std::size_t recs = 0, vises = 0, ties = 0, failures = 0;
  double max_corr_err = 0, max_other_err = 0;
  auto fail = [&](const std::string& why) {
    ++failures;
    if (o.detail.size() < 600) o.detail += " [" + why + "]";
  };

  // The scalar coefficient against the direct formula on random vectors.
  for (int i = 0; i < 500; ++i) {
    std::size_t n = g.between(2, 300);
    std::vector<double> x(n), y(n);
    double rho = 2 * g.unit() - 1;
    for (std::size_t j = 0; j < n; ++j) {
      x[j] = g.normal() * 100 + 5;
      y[j] = rho * x[j] + g.normal() * 50;
    }
    auto a = luxen::pearson(x, y);
    auto b = oracle::pearson(x, y);
    if (a.has_value() != b.has_value()) fail("pearson definedness");
    else if (a) max_corr_err = std::max(max_corr_err, std::abs(*a - *b));
  }
  {
    std::vector<double> x{1, 2, 3, 4}, y{1, 3, 2, 4};
    auto r = luxen::pearson(x, y);
    if (!r || std::abs(*r - 0.8) > 1e-12) fail("pearson [1,2,3,4]~[1,3,2,4]");
  }

  for (int f = 0; f < 100; ++f) {
    auto data = std::make_shared<const FrameData>(ranking_frame(g, f % 5));
    auto frame = Frame::create(*data);
    GenerateOptions opt;
    opt.config.prune = false;
    opt.config.async = false;
    opt.config.wflow = true;
    opt.config.k = 15;
    auto dash = generate_dashboard(*frame, registry, opt);
    auto snap = frame->snapshot();
    const auto& d = *snap;

    ActionContext ctx;
    ctx.data = snap;
    ctx.meta = std::make_shared<const MetadataSet>(compute_metadata(d));
    ctx.config = &opt.config;
    std::vector<std::string> diags;
    if (d.intent && !d.intent->clauses.empty()) ctx.intent_specs = compile_frame_intent(d, *ctx.meta, ctx.base, diags);
    const auto& meta = *ctx.meta;

    std::set<std::string> got_actions;
    for (const auto& r : dash.recommendations) got_actions.insert(r.action);
    if (got_actions != expected_actions(d, meta, ctx)) fail("frame " + std::to_string(f) + " action set");

    for (const auto& rec : dash.recommendations) {
      auto it = std::find_if(defaults.begin(), defaults.end(), [&](const Action& a) { return a.name == rec.action; });
      if (it == defaults.end()) continue;
      std::vector<std::string> gen_diags;
      auto cands = it->generate(ctx, gen_diags);
      ++recs;
      std::vector<OracleEntry> entries(cands.size());
      for (std::size_t i = 0; i < cands.size(); ++i) {
        entries[i].score = oracle_score(rec.action, cands[i], cands.size(), d, meta, ctx);
        entries[i].hint = cands[i].rank_hint;
        entries[i].key = cands[i].spec.sort_key();
        if (cands[i].spec.structure != StructureKind::none) entries[i].empty = process_vis(cands[i].spec, d).empty();
        else entries[i].empty = oracle::plotted_rows(d, cands[i].spec).empty();
      }
      std::vector<std::size_t> order(cands.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return oracle_before(entries[a], entries[b]); });
      std::vector<std::size_t> full;
      bool keep_empty = rec.action == actions::kCurrent;
      for (auto i : order)
        if (keep_empty || !entries[i].empty) full.push_back(i);
      std::size_t n = std::min<std::size_t>(opt.config.k, full.size());
      std::string where = "frame " + std::to_string(f) + " " + rec.action;
      if (rec.vises.size() != n) {
        fail(where + " size " + std::to_string(rec.vises.size()) + " vs " + std::to_string(n));
        continue;
      }
      std::vector<std::size_t> pos(cands.size(), SIZE_MAX), group(full.size());
      for (std::size_t p = 0; p < full.size(); ++p) {
        pos[full[p]] = p;
        group[p] = p == 0 || !near_tie(entries[full[p - 1]], entries[full[p]]) ? p : group[p - 1];
      }
      std::vector<std::size_t> group_end(full.size());
      for (std::size_t p = full.size(); p-- > 0;)
        group_end[p] = p + 1 == full.size() || group[p + 1] != group[p] ? p + 1 : group_end[p + 1];
      std::set<std::size_t> seen;
      for (std::size_t i = 0; i < n; ++i) {
        const auto& v = rec.vises[i];
        ++vises;
        if (v.candidate >= cands.size() || !(v.spec == cands[v.candidate].spec)) {
          fail(where + " spec mismatch at rank " + std::to_string(i + 1));
          break;
        }
        std::size_t p = pos[v.candidate];
        if (p == SIZE_MAX || !seen.insert(v.candidate).second) {
          fail(where + " unexpected vis at rank " + std::to_string(i + 1));
          break;
        }
        if (p != i) {
          if (group[p] != group[i] || p >= group_end[i]) {
            fail(where + " rank " + std::to_string(i + 1) + " holds oracle rank " + std::to_string(p + 1));
            break;
          }
          ++ties;
        }
        const auto& want = entries[v.candidate].score;
        if (v.score.has_value() != want.has_value()) {
          fail(where + " definedness at rank " + std::to_string(i + 1));
          break;
        }
        if (want) {
          double err = std::abs(*v.score - *want);
          bool corr = rec.action == actions::kCorrelation;
          (corr ? max_corr_err : max_other_err) = std::max(corr ? max_corr_err : max_other_err, err);
          if (err > (corr ? 1e-12 : 1e-9 * std::max(1.0, std::abs(*want)))) {
            fail(where + " score " + fmt("%.17g", *v.score) + " vs " + fmt("%.17g", *want));
            break;
          }
        }
      }
    }
  }
  o.pass = failures == 0 && max_corr_err <= 1e-12;
  o.detail = "100 frames, " + std::to_string(recs) + " recommendations, " + std::to_string(vises) +
             " vises, near-tie swaps " + std::to_string(ties) + ", max |dr| " + fmt("%.2e", max_corr_err) +
             ", max other err " + fmt("%.2e", max_other_err) + o.detail;
  return o;
}

// ---------------------------------------------------------------------------
// 3. Recall of pruned ranking

Outcome prune_recall() {
  Outcome o;
  std::map<std::string, double> sum;
  std::uint64_t max_rows = 0;
  bool pruned = true;
  OptimizerConfig cfg;
  cfg.sample_cap = 30000;
  cfg.k = 15;
  cfg.parallelism = 1;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SyntheticConfig sc;
    sc.rows = 100000;
    sc.cols = 128;
    sc.seed = seed;
    auto frame = Frame::create(make_synthetic(sc));
    for (const char* a : {actions::kCorrelation, actions::kDistribution}) {
      auto r = measure_recall(frame, a, cfg);
      sum[a] += r.recall;
      max_rows = std::max(max_rows, r.max_sample_rows);
      pruned = pruned && r.pruned;
    }
  }
  double corr = sum[actions::kCorrelation] / 10, dist = sum[actions::kDistribution] / 10;
  o.pass = corr >= 0.90 && dist >= 0.90 && max_rows <= 30000 && max_rows > 0 && pruned;
  o.detail = "mean Recall@15 Correlation " + fmt("%.3f", corr) + ", Distribution " + fmt("%.3f", dist) +
             ", max rows per approximate score " + std::to_string(max_rows) + (pruned ? "" : ", prune not applied");
  return o;
}

// ---------------------------------------------------------------------------
// 4. Lazy, memoized recomputation

Outcome wflow_counters() {
  Outcome o;
  SyntheticConfig sc;
  sc.rows = 20000;
  sc.cols = 50;
  sc.seed = 7;
  auto data = make_synthetic(sc);
  auto workload = default_workload(synthetic_layout(sc));
  std::size_t bad = 0;
  for (auto level : {OptLevel::wflow, OptLevel::all_opt}) {
    auto report = run_workload(data, workload, level);
    std::map<std::string, std::uint64_t> after_trigger;
    for (const auto& c : report.cells) {
      auto note = [&](const std::string& why) {
        ++bad;
        if (o.detail.size() < 400) o.detail += " [" + std::string(to_string(level)) + " cell " + std::to_string(c.index) + " " + why + "]";
      };
      bool print = c.kind == CellKind::print_frame || c.kind == CellKind::print_series;
      if (!print && (c.dashboard_computations || c.metadata_computations || c.scoring_operations))
        note("non-print cell computed");
      if (c.note == "repeat print" && (c.dashboard_computations || c.scoring_operations)) note("repeat print recomputed");
      if (c.note == "after rename" || c.note == "after column update" || c.note == "after inplace modify") {
        after_trigger[c.note] = c.dashboard_computations;
        if (c.dashboard_computations != 1) note(c.note + " computed " + std::to_string(c.dashboard_computations));
      }
    }
    if (after_trigger.size() != 3) {
      ++bad;
      o.detail += " [trigger cells missing]";
    }
  }
  o.pass = bad == 0;
  o.detail = "36-cell workload at wflow and all-opt, " + std::to_string(bad) + " violations" + o.detail;
  return o;
}

// ---------------------------------------------------------------------------
// 5. End-to-end speedup

Outcome speedup() {
  Outcome o;
  SyntheticConfig sc;
  sc.rows = 100000;
  sc.cols = 50;
  sc.seed = 1;
  auto data = make_synthetic(sc);
  auto workload = default_workload(synthetic_layout(sc));
  double no = run_workload(data, workload, OptLevel::no_opt).mean_cell_seconds();
  double all = run_workload(data, workload, OptLevel::all_opt).mean_cell_seconds();
  double ratio = all > 0 ? no / all : 0;
  o.pass = ratio >= 5.0;
  o.detail = "mean cell " + fmt("%.3f", no) + " s no-opt vs " + fmt("%.4f", all) + " s all-opt, ratio " + fmt("%.1f", ratio);
  return o;
}

// ---------------------------------------------------------------------------
// 6. Width scaling exponent

Outcome width_scaling() {
  Outcome o;
  std::vector<double> widths{10, 20, 40, 80, 160};
  std::map<OptLevel, PowerFit> fits;
  for (auto level : {OptLevel::no_opt, OptLevel::all_opt}) {
    std::vector<double> t;
    for (double w : widths) {
      SyntheticConfig sc;
      sc.rows = 100000;
      sc.cols = static_cast<std::size_t>(w);
      sc.seed = 1;
      t.push_back(time_single_print(make_synthetic(sc), level, {}, 3));
    }
    fits[level] = fit_power(widths, t);
    o.detail += std::string(to_string(level)) + " t(s)=";
    for (double x : t) o.detail += fmt("%.3f ", x);
    o.detail += "c=" + fmt("%.2f", fits[level].c) + "; ";
  }
  double c_no = fits[OptLevel::no_opt].c, c_all = fits[OptLevel::all_opt].c;
  o.pass = c_all < c_no && c_all <= 1.5;
  return o;
}

// ---------------------------------------------------------------------------
// 7. Streaming order over HTTP

struct SseEvent {
  std::string name;
  nlohmann::json data;
};

std::vector<SseEvent> parse_sse(const std::string& body) {
  std::vector<SseEvent> out;
  std::size_t start = 0;
  while (start < body.size()) {
    auto end = body.find("\n\n", start);
    if (end == std::string::npos) end = body.size();
    std::istringstream block(body.substr(start, end - start));
    SseEvent ev;
    std::string line, data;
    while (std::getline(block, line)) {
      if (line.rfind("event: ", 0) == 0) ev.name = line.substr(7);
      else if (line.rfind("data: ", 0) == 0) data += line.substr(6);
    }
    if (!ev.name.empty()) {
      ev.data = nlohmann::json::parse(data, nullptr, false);
      out.push_back(std::move(ev));
    }
    start = end + 2;
  }
  return out;
}

Outcome streaming_order() {
  Outcome o;
  ServerConfig config;
  config.port = 0;
  config.optimizer.parallelism = 2;
  Server server(config);
  auto actions_now = default_actions();
  auto corr = *std::find_if(actions_now.begin(), actions_now.end(),
                            [](const Action& a) { return a.name == actions::kCorrelation; });
  auto inner = corr.generate;
  corr.generate = [inner](const ActionContext& ctx, std::vector<std::string>& diags) {
    std::this_thread::sleep_for(std::chrono::milliseconds(400));
    return inner(ctx, diags);
  };
  corr.estimate = [](const ActionContext&) { return 1e15; };
  server.engine().registry().replace_action(corr);
  int port = server.start();

  std::string csv = "a,b,c,d,group,when\n";
  Gen g(5);
  for (int i = 0; i < 300; ++i) {
    double x = g.normal();
    csv += fmt("%.6f", x) + "," + fmt("%.6f", 2 * x + g.normal()) + "," + fmt("%.6f", g.normal()) + "," +
           std::to_string(g.below(1000)) + ",g" + std::to_string(g.below(4)) + ",2021-0" +
           std::to_string(1 + g.below(9)) + "-1" + std::to_string(g.below(9)) + "\n";
  }
  httplib::Client cli("127.0.0.1", port);
  cli.set_read_timeout(120, 0);
  auto s = cli.Post("/sessions", "", "application/json");
  if (!s || s->status != 201) {
    server.stop();
    return {false, "session creation failed"};
  }
  std::string session = nlohmann::json::parse(s->body)["session"];
  auto fr = cli.Post("/sessions/" + session + "/frames", csv, "text/csv");
  if (!fr || fr->status != 201) {
    server.stop();
    return {false, "upload failed"};
  }
  std::string frame = nlohmann::json::parse(fr->body)["frame"];
  auto res = cli.Get("/frames/" + frame + "/recommendations");
  server.stop();
  if (!res || res->status != 200) return {false, "stream request failed"};

  auto events = parse_sse(res->body);
  std::size_t done = 0, corr_index = SIZE_MAX, recs = 0, before_corr = 0;
  std::vector<std::string> names;
  std::map<std::string, std::size_t> event_position;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (e.name == "done") ++done;
    if (e.name != "recommendation") continue;
    std::string action = e.data["action"];
    names.push_back(action);
    event_position[action] = e.data["position"];
    if (action == actions::kCorrelation) corr_index = recs;
    ++recs;
  }
  before_corr = corr_index == SIZE_MAX ? 0 : corr_index;
  bool done_last = !events.empty() && events.back().name == "done";
  bool costs_sorted = true, positions_match = true;
  std::vector<std::string> start_order;
  if (done_last) {
    const auto& sched = events.back().data["schedule"];
    double prev = -1;
    for (std::size_t i = 0; i < sched.size(); ++i) {
      double c = sched[i]["estimated_cost"];
      std::size_t p = sched[i]["position"];
      std::string a = sched[i]["action"];
      start_order.push_back(a);
      if (c < prev || p != i) costs_sorted = false;
      prev = c;
      if (!event_position.count(a) || event_position[a] != p) positions_match = false;
    }
  }
  o.pass = done == 1 && done_last && corr_index != SIZE_MAX && before_corr >= 1 && costs_sorted && positions_match;
  o.detail = std::to_string(recs) + " recommendation events, " + std::to_string(before_corr) +
             " before Correlation, done x" + std::to_string(done) + ", start order";
  for (const auto& a : start_order) o.detail += " " + a;
  if (!costs_sorted) o.detail += " (costs not ascending)";
  if (!positions_match) o.detail += " (positions differ)";
  return o;
}

// ---------------------------------------------------------------------------
// 8. Conservation of binned and grouped output

std::optional<CompiledVisSpec> compile_partial(const PartialVisSpec& p, const MetadataSet& meta, std::size_t rows) {
  auto v = lookup_defaults(p, meta);
  if (!v) return std::nullopt;
  return infer_encoding(*v, meta, rows);
}

std::vector<Comparison> random_filters(Gen& g, const FrameData& d, const MetadataSet& meta) {
  std::vector<Comparison> out;
  std::size_t n = g.below(3);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& m = meta.columns[g.below(meta.columns.size())];
    if (m.unique_values.empty()) continue;
    auto op = g.pick(std::vector<FilterOp>{FilterOp::eq, FilterOp::ne, FilterOp::lt, FilterOp::ge});
    out.push_back(Comparison{m.name, op, format_cell(m.unique_values[g.below(m.unique_values.size())])});
  }
  (void)d;
  return out;
}

bool close(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b));
}

double oracle_aggregate(Aggregation agg, const std::vector<double>& v) {
  double nan = std::nan("");
  switch (agg) {
    case Aggregation::count: return static_cast<double>(v.size());
    case Aggregation::sum: {
      long double s = 0;
      for (double x : v) s += x;
      return static_cast<double>(s);
    }
    case Aggregation::none:
    case Aggregation::mean: {
      if (v.empty()) return nan;
      long double s = 0;
      for (double x : v) s += x;
      return static_cast<double>(s / v.size());
    }
    case Aggregation::min: return v.empty() ? nan : *std::min_element(v.begin(), v.end());
    case Aggregation::max: return v.empty() ? nan : *std::max_element(v.begin(), v.end());
    case Aggregation::variance: {
      if (v.size() < 2) return nan;
      long double s = 0;
      for (double x : v) s += x;
      long double mean = s / v.size(), ss = 0;
      for (double x : v) ss += (x - mean) * (x - mean);
      return static_cast<double>(ss / (v.size() - 1));
    }
  }
  return nan;
}

Outcome conservation() {
  Outcome o;
  Gen g(99);
  std::size_t binned = 0, grouped = 0, bad = 0, truncated = 0;
  auto fail = [&](const std::string& why) {
    ++bad;
    if (o.detail.size() < 400) o.detail += " [" + why + "]";
  };
  FrameData d;
  MetadataSet meta;
  std::vector<std::string> qcols, ncols;
  auto refresh = [&] {
    do {
      d = luxen::testing::random_frame_data(g, FrameShape{800, 8, 1, 3, true});
      meta = compute_metadata(d);
      qcols.clear();
      ncols.clear();
      for (const auto& m : meta.columns) {
        if (m.cardinality == 0) continue;
        if (m.semantic == SemanticType::quantitative && d.column(m.name).is_numeric()) qcols.push_back(m.name);
        if (m.semantic == SemanticType::nominal && m.cardinality <= 40) ncols.push_back(m.name);
      }
    } while (qcols.size() < 2 || ncols.size() < 2);
  };

  int attempts = 0;
  while (binned < 1000 && attempts < 20000) {
    ++attempts;
    if (binned % 10 == 0) refresh();
    PartialVisSpec p;
    bool heat = g.chance(0.5);
    std::string a = g.pick(qcols), b = g.pick(qcols);
    if (heat && a == b) continue;
    p.axes.push_back(AxisSpec{a, {}, {}, heat || g.chance(0.5) ? std::optional<int>(static_cast<int>(g.between(1, 40))) : std::nullopt, {}});
    if (heat) p.axes.push_back(AxisSpec{b, {}, {}, static_cast<int>(g.between(1, 40)), {}});
    p.filters = random_filters(g, d, meta);
    auto spec = compile_partial(p, meta, d.rows);
    if (!spec || (spec->mark != Mark::histogram && spec->mark != Mark::heatmap)) continue;
    ++binned;
    auto out = process_vis(*spec, d);
    auto rows = oracle::plotted_rows(d, *spec);
    std::vector<const Encoding*> encs;
    for (const auto* e : {&spec->x, &spec->y})
      if (*e && (*e)->bins && (*e)->extent) encs.push_back(&**e);
    std::map<std::vector<int>, double> want;
    for (auto r : rows) {
      std::vector<int> cell;
      for (const auto* e : encs)
        cell.push_back(oracle::bin_of(d.column(e->field).number(r), e->extent->first, e->extent->second, *e->bins));
      want[cell] += 1;
    }
    if (out.empty() && rows.empty()) continue;
    const auto* count = out.find(kCountField);
    if (!count) {
      fail("no count column in " + spec_summary(*spec).dump() + " rows " + std::to_string(rows.size()));
      continue;
    }
    double total = std::accumulate(count->numbers().begin(), count->numbers().end(), 0.0);
    if (total != static_cast<double>(rows.size())) fail("sum " + fmt("%.0f", total) + " vs " + std::to_string(rows.size()));
    std::map<std::vector<int>, double> got;
    for (std::size_t i = 0; i < out.rows(); ++i) {
      std::vector<int> cell;
      for (const auto* e : encs) {
        auto [lo, hi] = *e->extent;
        double w = (hi - lo) / *e->bins;
        double start = out.find(e->field)->numbers()[i];
        cell.push_back(w > 0 ? static_cast<int>(std::lround((start - lo) / w)) : 0);
      }
      if (count->numbers()[i] > 0) got[cell] += count->numbers()[i];
    }
    if (got != want) fail(std::string(to_string(spec->mark)) + " bin counts differ");
  }

  attempts = 0;
  while (grouped < 300 && attempts < 20000) {
    ++attempts;
    if (grouped % 10 == 0) refresh();
    PartialVisSpec p;
    std::string x = g.pick(ncols), c = g.pick(ncols);
    p.axes.push_back(AxisSpec{x, {}, {}, {}, {}});
    bool two = g.chance(0.4) && c != x;
    if (two) p.axes.push_back(AxisSpec{c, {}, {}, {}, {}});
    if (g.chance(0.75)) {
      auto agg = g.pick(std::vector<Aggregation>{Aggregation::mean, Aggregation::sum, Aggregation::count,
                                                  Aggregation::min, Aggregation::max, Aggregation::variance});
      p.axes.push_back(AxisSpec{g.pick(qcols), {}, agg, {}, {}});
    }
    p.filters = random_filters(g, d, meta);
    auto spec = compile_partial(p, meta, d.rows);
    if (!spec || (spec->mark != Mark::bar && spec->mark != Mark::color_bar)) continue;
    ++grouped;
    auto out = process_vis(*spec, d);
    auto rows = oracle::plotted_rows(d, *spec);
    std::vector<std::string> dims;
    const Encoding* measure = nullptr;
    for (const auto* e : {&spec->x, &spec->y, &spec->color}) {
      if (!*e) continue;
      if ((*e)->is_count() || (*e)->is_measure()) measure = &**e;
      else dims.push_back((*e)->field);
    }
    Aggregation agg = measure && !measure->is_count() ? measure->aggregate : Aggregation::count;
    // Nested loops: every distinct label tuple, then a full scan per tuple.
    std::set<std::vector<std::string>> labels;
    for (auto r : rows) {
      std::vector<std::string> key;
      for (const auto& dim : dims) key.push_back(d.column(dim).format(r));
      labels.insert(key);
    }
    std::map<std::vector<std::string>, double> want;
    for (const auto& key : labels) {
      std::vector<double> values;
      for (auto r : rows) {
        bool match = true;
        for (std::size_t k = 0; k < dims.size(); ++k)
          if (d.column(dims[k]).format(r) != key[k]) match = false;
        if (match) values.push_back(measure && !measure->is_count() ? d.column(measure->field).number(r) : 1.0);
      }
      want[key] = oracle_aggregate(agg, values);
    }
    const auto& value_col = out.columns.back();
    std::map<std::vector<std::string>, double> got;
    for (std::size_t i = 0; i < out.rows(); ++i) {
      std::vector<std::string> key;
      for (const auto& dim : dims) key.push_back(out.find(dim)->labels()[i]);
      got[key] = value_col.numbers()[i];
    }
    bool limited = spec->sort_descending && spec->top_categories;
    std::map<std::string, double> totals;
    for (const auto& [key, v] : want)
      if (!std::isnan(v)) totals[key[0]] += v;
    std::set<std::string> kept;
    for (const auto& [key, v] : got) kept.insert(key[0]);
    for (const auto& [key, v] : got)
      if (!want.count(key) || !close(v, want[key])) {
        fail("group value differs");
        break;
      }
    std::set<std::string> primaries;
    for (const auto& [key, v] : want) primaries.insert(key[0]);
    if (!limited || primaries.size() <= *spec->top_categories) {
      if (got.size() != want.size()) fail("group count " + std::to_string(got.size()) + " vs " + std::to_string(want.size()));
    } else {
      ++truncated;
      double kept_min = INFINITY;
      for (const auto& k : kept) kept_min = std::min(kept_min, totals[k]);
      for (const auto& p2 : primaries)
        if (!kept.count(p2) && totals[p2] > kept_min + 1e-9 * std::max(1.0, std::abs(kept_min)))
          fail("omitted category outranks a kept one");
      if (kept.size() != *spec->top_categories) fail("kept category count");
    }
  }
  o.pass = bad == 0 && binned == 1000 && grouped == 300;
  o.detail = std::to_string(binned) + " binned specs, " + std::to_string(grouped) + " group-by specs (" +
             std::to_string(truncated) + " truncated), " + std::to_string(bad) + " violations" + o.detail;
  return o;
}

// ---------------------------------------------------------------------------
// 9. Dashboard generation leaves the frame untouched

Outcome wysiwyg() {
  Outcome o;
  Gen g(31337);
  auto all = make_engine(OptLevel::all_opt);
  auto none = make_engine(OptLevel::no_opt);
  std::size_t bad = 0;
  for (int i = 0; i < 100; ++i) {
    auto data = luxen::testing::random_frame_data(g, FrameShape{600, 10, 1, 1, true});
    if (i % 2 == 1) {
      auto names = data.column_names();
      std::vector<std::string> values{"0", "k1", "10"};
      IntentSpec intent;
      intent.clauses.push_back(luxen::testing::random_clause(g, names, values));
      data.intent = intent;
      data.intent_version = 1;
    }
    auto frame = Frame::create(data);
    auto before = frame->snapshot();
    auto hash = before->content_hash();
    auto csv = to_csv(*before);
    auto version = before->version, iv = before->intent_version;
    auto& engine = i % 4 < 2 ? *all : *none;
    auto dash = engine.lookup_or_compute(frame);
    auto after = frame->snapshot();
    if (after->content_hash() != hash || after->version != version || after->intent_version != iv ||
        to_csv(*after) != csv || !dash) {
      ++bad;
      o.detail += " [frame " + std::to_string(i) + "]";
    }
  }
  o.pass = bad == 0;
  o.detail = "100 frames, " + std::to_string(bad) + " changed" + o.detail;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    const char* id;
    const char* name;
    double limit;  // seconds; 0 when untimed
    std::function<Outcome()> run;
  };
  std::vector<Criterion> all{
      {"C1", "intent expansion matches brute force", 1.0, intent_expansion},
      {"C2", "ranking matches exhaustive scoring", 30.0, ranking_oracle},
      {"C3", "pruned Recall@15 over 10 seeds", 300.0, prune_recall},
      {"C4", "wflow recomputes only when needed", 0, wflow_counters},
      {"C5", "all-opt speedup over no-opt", 600.0, speedup},
      {"C6", "width scaling exponent", 0, width_scaling},
      {"C7", "streaming order over SSE", 0, streaming_order},
      {"C8", "binned and grouped conservation", 0, conservation},
      {"C9", "dashboards leave frames untouched", 0, wysiwyg},
  };
  std::set<std::string> only;
  for (int i = 1; i < argc; ++i) only.insert(argv[i]);

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    auto t0 = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = since(t0);
    if (c.limit > 0 && secs >= c.limit) {
      o.pass = false;
      o.detail += " (over the " + fmt("%.0f", c.limit) + " s limit)";
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << c.id << " " << c.name << " (" << fmt("%.2f", secs)
              << " s): " << o.detail << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << std::endl;
  return failed ? 1 : 0;
}
