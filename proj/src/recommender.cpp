#include "luxen/recommender.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <set>

#include "luxen/stats.hpp"

namespace luxen {

std::string_view to_string(Dispatch d) noexcept {
  switch (d) {
    case Dispatch::intent: return "intent";
    case Dispatch::structure: return "structure";
    case Dispatch::series: return "series";
    case Dispatch::history: return "history";
    case Dispatch::overview: return "overview";
  }
  return "overview";
}

std::string vis_id(std::string_view action, std::size_t rank) { return std::string(action) + "-" + std::to_string(rank); }

const Recommendation* Dashboard::find(std::string_view action) const noexcept {
  for (const auto& r : recommendations)
    if (r.action == action) return &r;
  return nullptr;
}

const Vis* Dashboard::find_vis(std::string_view id) const {
  auto dash = id.rfind('-');
  if (dash == std::string_view::npos) return nullptr;
  auto rank = parse_int(id.substr(dash + 1));
  if (!rank || *rank < 1) return nullptr;
  const auto* rec = find(id.substr(0, dash));
  if (!rec || static_cast<std::size_t>(*rank) > rec->vises.size()) return nullptr;
  return &rec->vises[static_cast<std::size_t>(*rank - 1)];
}

// ---------------------------------------------------------------------------
// Registry

Registry::Registry() : actions_(std::make_shared<const std::vector<Action>>(default_actions())) {}

Registry Registry::empty() { return Registry(EmptyTag{}); }

void Registry::register_action(Action action) {
  std::lock_guard lock(mu_);
  for (const auto& a : *actions_)
    if (a.name == action.name) throw InvalidArgument("action '" + action.name + "' is already registered");
  if (!action.generate) throw InvalidArgument("action '" + action.name + "' has no generator");
  auto next = std::make_shared<std::vector<Action>>(*actions_);
  if (action.display_order == kCustomDisplayOrder) action.display_order += static_cast<int>(next->size());
  next->push_back(std::move(action));
  actions_ = std::move(next);
}

void Registry::replace_action(Action action) {
  std::lock_guard lock(mu_);
  if (!action.generate) throw InvalidArgument("action '" + action.name + "' has no generator");
  auto next = std::make_shared<std::vector<Action>>(*actions_);
  auto it = std::find_if(next->begin(), next->end(), [&](const Action& a) { return a.name == action.name; });
  if (it == next->end()) throw InvalidArgument("action '" + action.name + "' is not registered");
  *it = std::move(action);
  actions_ = std::move(next);
}

std::shared_ptr<const std::vector<Action>> Registry::snapshot() const {
  std::lock_guard lock(mu_);
  return actions_;
}

bool Registry::contains(std::string_view name) const {
  auto snap = snapshot();
  return std::any_of(snap->begin(), snap->end(), [&](const Action& a) { return a.name == name; });
}

// ---------------------------------------------------------------------------
// Default actions

namespace {

bool usable_column(const ColumnMetadata& m) { return m.cardinality > 0; }

bool quantitative_column(const ColumnMetadata& m) {
  return usable_column(m) && m.semantic == SemanticType::quantitative && m.storage != StorageType::string;
}

std::size_t count_of(const MetadataSet& meta, SemanticType t) {
  std::size_t n = 0;
  for (const auto& m : meta.columns) {
    if (!usable_column(m) || m.semantic != t) continue;
    if (t == SemanticType::quantitative && m.storage == StorageType::string) continue;
    ++n;
  }
  return n;
}

std::optional<CompiledVisSpec> compile_partial(const PartialVisSpec& p, const ActionContext& ctx,
                                               std::vector<std::string>* diags = nullptr) {
  auto valid = lookup_defaults(p, ctx.metadata(), diags);
  if (!valid) return std::nullopt;
  return infer_encoding(*valid, ctx.metadata(), ctx.rows(), ctx.encoding);
}

std::vector<Candidate> univariate(const ActionContext& ctx, SemanticType type, bool hint_cardinality) {
  std::vector<Candidate> out;
  for (const auto& m : ctx.metadata().columns) {
    if (!usable_column(m) || m.semantic != type) continue;
    PartialVisSpec p;
    p.axes.push_back(AxisSpec{m.name, {}, {}, {}, {}});
    if (auto spec = compile_partial(p, ctx)) {
      Candidate c;
      c.spec = std::move(*spec);
      c.rank_hint = hint_cardinality ? static_cast<double>(m.cardinality) : 0.0;
      out.push_back(std::move(c));
    }
  }
  return out;
}

Action univariate_action(const char* name, SemanticType type, ScoreKind kind, bool prunable, int order) {
  Action a;
  a.name = name;
  a.kind = kind;
  a.prunable = prunable;
  a.paths = {Dispatch::overview};
  a.display_order = order;
  a.trigger = [type](const ActionContext& ctx) { return count_of(ctx.metadata(), type) > 0; };
  bool hint = kind != ScoreKind::distribution;
  a.generate = [type, hint](const ActionContext& ctx, std::vector<std::string>&) { return univariate(ctx, type, hint); };
  return a;
}

bool names_look_ordered(const FrameData& data) {
  for (const auto& c : data.columns) {
    auto n = trim(c->name());
    if (!parse_iso_datetime(n) && !parse_double(n)) return false;
  }
  return true;
}

std::vector<Candidate> structure_candidates(const ActionContext& ctx, std::vector<std::string>& diags) {
  const auto& data = ctx.frame();
  std::vector<Candidate> out;
  if (data.index.size() > 1) {
    diags.push_back("multi-level indexes are not supported for index-based visualizations");
    return out;
  }
  std::vector<const Column*> numeric;
  for (const auto& c : data.columns)
    if (c->is_numeric() && c->type() != StorageType::boolean && c->type() != StorageType::datetime)
      numeric.push_back(c.get());
  if (numeric.empty()) {
    diags.push_back("no quantitative value columns to visualize");
    return out;
  }
  bool homogeneous = numeric.size() == data.columns.size() && numeric.size() >= 2 &&
                     std::all_of(numeric.begin(), numeric.end(), [&](auto* c) { return c->type() == numeric[0]->type(); });
  if (homogeneous) {
    Mark mark = names_look_ordered(data) ? Mark::line : Mark::bar;
    for (std::size_t r = 0; r < data.rows; ++r) {
      Candidate c;
      c.spec.mark = mark;
      c.spec.structure = StructureKind::row_wise;
      c.spec.structure_row = r;
      c.spec.structure_label = data.row_label(r);
      c.spec.x = Encoding{"column", SemanticType::nominal, Aggregation::none, {}, {}, {}, false};
      c.spec.y = Encoding{"value", SemanticType::quantitative, Aggregation::none, {}, {}, {}, false};
      c.rank_hint = static_cast<double>(r);
      out.push_back(std::move(c));
    }
    return out;
  }
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    Candidate c;
    c.spec.mark = Mark::bar;
    c.spec.structure = StructureKind::column_wise;
    c.spec.structure_label = numeric[i]->name();
    c.spec.x = Encoding{data.index_name(), SemanticType::nominal, Aggregation::none, {}, {}, {}, false};
    c.spec.y = Encoding{numeric[i]->name(), SemanticType::quantitative, Aggregation::none, {}, {}, {}, false};
    c.rank_hint = static_cast<double>(i);
    out.push_back(std::move(c));
  }
  return out;
}

std::optional<double> current_score(const Candidate& c, const ActionContext& ctx, const std::vector<std::uint32_t>* rows) {
  const auto& s = c.spec;
  auto quant = [](const std::optional<Encoding>& e) {
    return e && !e->is_count() && !e->is_measure() && e->type == SemanticType::quantitative;
  };
  ScoreContext sc;
  sc.meta = ctx.meta.get();
  if ((s.mark == Mark::scatter || s.mark == Mark::heatmap) && quant(s.x) && quant(s.y)) sc.kind = ScoreKind::correlation;
  else if (s.mark == Mark::histogram) sc.kind = ScoreKind::distribution;
  else return 0.0;
  return interestingness(s, ctx.frame(), sc, rows);
}

}  // namespace

std::vector<Action> default_actions() {
  std::vector<Action> out;

  Action current;
  current.name = actions::kCurrent;
  current.paths = {Dispatch::intent};
  current.display_order = 0;
  current.trigger = [](const ActionContext& ctx) { return !ctx.intent_specs.empty(); };
  current.generate = [](const ActionContext& ctx, std::vector<std::string>&) {
    std::vector<Candidate> out;
    for (std::size_t i = 0; i < ctx.intent_specs.size(); ++i) {
      Candidate c;
      c.spec = ctx.intent_specs[i];
      c.rank_hint = static_cast<double>(i);
      if (ctx.intent_specs.size() == 1) c.scored = true;  // the current vis itself is not ranked
      out.push_back(std::move(c));
    }
    return out;
  };
  current.score = current_score;
  out.push_back(std::move(current));

  Action enhance;
  enhance.name = actions::kEnhance;
  enhance.kind = ScoreKind::enhance;
  enhance.paths = {Dispatch::intent};
  enhance.display_order = 1;
  enhance.trigger = [](const ActionContext& ctx) { return ctx.base.has_value(); };
  enhance.generate = [](const ActionContext& ctx, std::vector<std::string>& diags) {
    std::vector<Candidate> out;
    const auto& base = ctx.base->partial;
    if (base.axes.size() >= kMaxAxes) {
      diags.push_back("the current visualization already has three axes");
      return out;
    }
    std::set<std::string> used;
    for (const auto& a : base.axes) used.insert(a.attribute);
    for (const auto& m : ctx.metadata().columns) {
      if (used.count(m.name) || !usable_column(m)) continue;
      PartialVisSpec p = base;
      p.axes.push_back(AxisSpec{m.name, {}, {}, {}, {}});
      if (auto spec = compile_partial(p, ctx)) {
        Candidate c;
        c.spec = std::move(*spec);
        c.added = m.name;
        out.push_back(std::move(c));
      }
    }
    return out;
  };
  out.push_back(std::move(enhance));

  Action filter;
  filter.name = actions::kFilter;
  filter.kind = ScoreKind::filter;
  filter.paths = {Dispatch::intent};
  filter.display_order = 2;
  filter.trigger = [](const ActionContext& ctx) { return ctx.base.has_value(); };
  filter.generate = [](const ActionContext& ctx, std::vector<std::string>& diags) {
    std::vector<Candidate> out;
    const auto& base = ctx.base->partial;
    std::set<std::string> filtered;
    for (const auto& f : base.filters) filtered.insert(f.column);
    bool any = false;
    for (const auto& m : ctx.metadata().columns) {
      if (filtered.count(m.name) || !usable_column(m) || m.capped || m.cardinality > kFilterCardinality) continue;
      any = true;
      for (const auto& u : m.unique_values) {
        PartialVisSpec p = base;
        p.filters.push_back(Comparison{m.name, FilterOp::eq, format_cell(u)});
        if (auto spec = compile_partial(p, ctx)) {
          Candidate c;
          c.spec = std::move(*spec);
          out.push_back(std::move(c));
        }
      }
    }
    if (!any) diags.push_back("no low-cardinality columns to filter on");
    return out;
  };
  out.push_back(std::move(filter));

  Action corr;
  corr.name = actions::kCorrelation;
  corr.kind = ScoreKind::correlation;
  corr.prunable = true;
  corr.paths = {Dispatch::overview};
  corr.display_order = 3;
  corr.trigger = [](const ActionContext& ctx) { return count_of(ctx.metadata(), SemanticType::quantitative) >= 2; };
  corr.estimate = [](const ActionContext& ctx) {
    std::vector<const ColumnMetadata*> q;
    for (const auto& m : ctx.metadata().columns)
      if (quantitative_column(m)) q.push_back(&m);
    double pairs = static_cast<double>(q.size()) * static_cast<double>(q.size() - 1) / 2;
    for (std::size_t i = 0; i + 1 < q.size(); ++i) {
      PartialVisSpec p;
      p.axes.push_back(AxisSpec{q[i]->name, {}, {}, {}, {}});
      p.axes.push_back(AxisSpec{q[i + 1]->name, {}, {}, {}, {}});
      if (auto spec = compile_partial(p, ctx)) return pairs * estimate_vis_cost(*spec, ctx.rows());
    }
    return 0.0;
  };
  corr.generate = [](const ActionContext& ctx, std::vector<std::string>&) {
    std::vector<Candidate> out;
    std::vector<const ColumnMetadata*> q;
    for (const auto& m : ctx.metadata().columns)
      if (quantitative_column(m)) q.push_back(&m);
    // Same enumeration as expanding [?quantitative, ?quantitative], without
    // materializing the full cross product.
    for (std::size_t i = 0; i < q.size(); ++i) {
      for (std::size_t j = i + 1; j < q.size(); ++j) {
        const auto* a = q[i];
        const auto* b = q[j];
        if (b->name < a->name) std::swap(a, b);
        PartialVisSpec p;
        p.axes.push_back(AxisSpec{a->name, {}, {}, {}, {}});
        p.axes.push_back(AxisSpec{b->name, {}, {}, {}, {}});
        if (auto spec = compile_partial(p, ctx)) {
          Candidate c;
          c.spec = std::move(*spec);
          out.push_back(std::move(c));
        }
      }
    }
    return out;
  };
  out.push_back(std::move(corr));

  out.push_back(univariate_action(actions::kDistribution, SemanticType::quantitative, ScoreKind::distribution, true, 4));
  out.push_back(univariate_action(actions::kOccurrence, SemanticType::nominal, ScoreKind::occurrence, false, 5));
  out.push_back(univariate_action(actions::kTemporal, SemanticType::temporal, ScoreKind::temporal, false, 6));
  out.push_back(univariate_action(actions::kGeographic, SemanticType::geographic, ScoreKind::geographic, false, 7));

  Action index;
  index.name = actions::kIndex;
  index.paths = {Dispatch::structure};
  index.display_order = 8;
  index.trigger = [](const ActionContext&) { return true; };
  index.generate = structure_candidates;
  out.push_back(std::move(index));

  Action series;
  series.name = actions::kSeries;
  series.paths = {Dispatch::series};
  series.display_order = 9;
  series.trigger = [](const ActionContext&) { return true; };
  series.generate = [](const ActionContext& ctx, std::vector<std::string>& diags) {
    std::vector<Candidate> out;
    const auto& m = ctx.metadata().columns.front();
    PartialVisSpec p;
    p.axes.push_back(AxisSpec{m.name, {}, {}, {}, {}});
    if (auto spec = compile_partial(p, ctx, &diags)) {
      Candidate c;
      c.spec = std::move(*spec);
      out.push_back(std::move(c));
    }
    return out;
  };
  out.push_back(std::move(series));
  return out;
}

// ---------------------------------------------------------------------------
// Dispatch and intent

Dispatch dispatch_path(const FrameData& data, bool has_intent) {
  if (has_intent) return Dispatch::intent;
  if (data.pre_aggregated) return Dispatch::structure;
  if (data.columns.size() == 1) return Dispatch::series;
  if (data.rows < kSmallFrameRows && !data.history.empty()) {
    auto k = data.history.back().kind;
    if (k == HistoryKind::filter || k == HistoryKind::head_tail) return Dispatch::history;
  }
  return Dispatch::overview;
}

std::vector<CompiledVisSpec> compile_frame_intent(const FrameData& data, const MetadataSet& meta,
                                                  std::optional<IntentBase>& base,
                                                  std::vector<std::string>& diagnostics,
                                                  const EncodingOptions& encoding) {
  base.reset();
  std::vector<CompiledVisSpec> specs;
  if (!data.intent) return specs;
  std::vector<PartialVisSpec> partials;
  try {
    for (const auto& p : expand_intent(*data.intent, meta))
      if (auto v = lookup_defaults(p, meta, &diagnostics)) partials.push_back(std::move(*v));
  } catch (const Error& e) {
    diagnostics.push_back(e.what());
    return specs;
  }
  for (const auto& p : partials) specs.push_back(infer_encoding(p, meta, data.rows, encoding));
  if (specs.size() == 1) base = IntentBase{partials.front(), specs.front()};
  return specs;
}

// ---------------------------------------------------------------------------
// Running actions

namespace {

struct Prepared {
  const Action* action = nullptr;
  std::vector<Candidate> candidates;
  std::vector<std::string> diagnostics;
  double cost = 0;
  std::size_t registration = 0;
  bool generated = false;
};

double structure_cost(const CompiledVisSpec& spec, const FrameData& data) {
  if (spec.structure == StructureKind::row_wise) return static_cast<double>(data.columns.size()) * mark_weight(spec.mark);
  return static_cast<double>(data.rows) * mark_weight(spec.mark);
}

Prepared prepare(const Action& action, const ActionContext& ctx) {
  Prepared p;
  p.action = &action;
  if (action.estimate) {
    try {
      p.cost = action.estimate(ctx);
      return p;
    } catch (const std::exception&) {
      p.cost = 0;
    }
  }
  p.generated = true;
  try {
    p.candidates = action.generate(ctx, p.diagnostics);
  } catch (const std::exception& e) {
    p.diagnostics.push_back(std::string("action failed: ") + e.what());
  }
  for (const auto& c : p.candidates) {
    p.cost += c.spec.structure != StructureKind::none ? structure_cost(c.spec, ctx.frame())
                                                       : estimate_vis_cost(c.spec, ctx.rows());
  }
  return p;
}

std::string added_attribute(const CompiledVisSpec& spec, const ActionContext& ctx) {
  if (!ctx.base) return {};
  auto base = ctx.base->spec.attributes();
  for (const auto& a : spec.attributes())
    if (std::find(base.begin(), base.end(), a) == base.end()) return a;
  return {};
}

Recommendation run_prepared(Prepared prep, const ActionContext& ctx, Frame& frame, const GenerateOptions& options) {
  const Action& action = *prep.action;
  const auto& cfg = options.config;
  Recommendation rec;
  rec.action = action.name;
  rec.display_order = action.display_order;
  rec.estimated_cost = prep.cost;
  rec.diagnostics = std::move(prep.diagnostics);
  if (!prep.generated) prep.candidates = action.generate(ctx, rec.diagnostics);
  auto& cands = prep.candidates;
  if (cands.empty()) return rec;

  const auto& data = ctx.frame();
  std::vector<Vis> vises;
  vises.reserve(cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) {
    Vis v;
    v.spec = cands[i].spec;
    v.frame_version = data.version;
    v.rank_hint = cands[i].rank_hint;
    v.candidate = i;
    if (cands[i].scored) v.score = cands[i].score;
    vises.push_back(std::move(v));
  }

  auto process = [&](Vis& v) {
    if (!v.data) {
      v.data = process_vis(v.spec, data);
      stats().vis_processed++;
    }
  };
  if (options.eager_processing)
    for (auto& v : vises) process(v);

  bool preset = std::all_of(cands.begin(), cands.end(), [](const Candidate& c) { return c.scored; });
  std::vector<Vis> ranked;
  if (preset) {
    ranked = std::move(vises);
    rank(ranked);
  } else {
    VisScorer scorer = [&](const Vis& v, const SampleCache* sample) -> std::optional<double> {
      const auto& c = cands[v.candidate];
      if (c.scored) return c.score;
      if (action.score) {
        stats().scoring_operations++;
        return action.score(c, ctx, sample ? &sample->rows : nullptr);
      }
      ScoreContext sc;
      sc.kind = action.kind;
      sc.meta = ctx.meta.get();
      if (ctx.base) sc.base = &ctx.base->spec;
      sc.added = c.added.empty() ? added_attribute(c.spec, ctx) : c.added;
      return interestingness(v.spec, sample ? *sample->data : data, sc);
    };
    std::optional<PruneDecision> decision;
    if (cfg.prune && action.prunable && !options.eager_processing && data.rows > 0) {
      double exact = 0, approx = 0;
      std::size_t n_approx = std::min(data.rows, cfg.sample_cap);
      for (const auto& v : vises) {
        exact += estimate_vis_cost(v.spec, data.rows);
        approx += estimate_vis_cost(v.spec, n_approx);
      }
      double n = static_cast<double>(vises.size());
      decision = should_prune(vises.size(), cfg.k, exact / n, approx / n, cfg.margin);
    }
    if (decision && decision->apply) {
      std::shared_ptr<const SampleCache> sample;
      if (cfg.wflow) sample = make_sample(frame, data, cfg.sample_cap, cfg.seed);
      else sample = materialize_sample(data, build_sample(data.rows, cfg.sample_cap, cfg.seed, data.version));
      ranked = approx_topk(std::move(vises), scorer, *sample, cfg.k);
    } else {
      ranked = exact_rank(std::move(vises), scorer);
    }
  }

  bool keep_empty = action.name == actions::kCurrent;
  for (auto& v : ranked) {
    if (rec.vises.size() >= cfg.k) {
      rec.truncated = true;
      break;
    }
    process(v);
    if (v.data->empty() && !keep_empty) continue;
    rec.vises.push_back(std::move(v));
  }
  return rec;
}

bool runs_on(const Action& a, Dispatch path) {
  return a.paths.empty() || std::find(a.paths.begin(), a.paths.end(), path) != a.paths.end();
}

}  // namespace

Recommendation run_action(const Action& action, const ActionContext& ctx, Frame& frame, const GenerateOptions& options) {
  return run_prepared(prepare(action, ctx), ctx, frame, options);
}

Dashboard generate_dashboard(Frame& frame, const Registry& registry, const GenerateOptions& options) {
  return generate_dashboard(frame, frame.snapshot(), registry, options);
}

Dashboard generate_dashboard(Frame& frame, std::shared_ptr<const FrameData> snap, const Registry& registry,
                             const GenerateOptions& options) {
  stats().dashboard_computations++;
  const auto& cfg = options.config;

  Dashboard dash;
  dash.frame_version = snap->version;
  dash.intent_version = snap->intent_version;
  dash.k = cfg.k;

  ActionContext ctx;
  ctx.data = snap;
  ctx.config = &cfg;
  ctx.encoding = options.encoding;
  if (cfg.wflow) {
    ctx.meta = frame.metadata_for(snap);
  } else {
    ctx.meta = std::make_shared<const MetadataSet>(compute_metadata(*snap));
    stats().metadata_computations++;
  }

  bool has_intent = snap->intent && !snap->intent->clauses.empty();
  if (has_intent) {
    try {
      for (const auto& w : validate_intent(*snap->intent, *ctx.meta)) dash.warnings.push_back(w.message);
      ctx.intent_specs = compile_frame_intent(*snap, *ctx.meta, ctx.base, dash.diagnostics, ctx.encoding);
      if (ctx.intent_specs.empty()) {
        dash.diagnostics.push_back("intent produced no valid visualization; showing the overview");
        has_intent = false;
      }
    } catch (const IntentError& e) {
      dash.diagnostics.push_back(e.what());
      has_intent = false;
    }
  }
  Dispatch path = dispatch_path(*snap, has_intent);

  auto deliver_mu = std::make_shared<std::mutex>();
  auto deliver = [&](const Recommendation& r) {
    if (!options.on_recommendation) return;
    std::lock_guard lock(*deliver_mu);
    options.on_recommendation(r);
  };

  if (path == Dispatch::history) {
    auto parent = frame.parent();
    if (!parent) {
      Recommendation r;
      r.action = actions::kUnfiltered;
      r.display_order = 10;
      r.diagnostics.push_back("the unfiltered parent frame is no longer available");
      if (options.on_schedule) options.on_schedule({ScheduleEntry{r.action, 0, 0, 0}});
      deliver(r);
      dash.recommendations.push_back(std::move(r));
      return dash;
    }
    GenerateOptions sub = options;
    sub.pool = nullptr;
    sub.on_recommendation = nullptr;
    sub.on_schedule = nullptr;
    auto parent_dash = generate_dashboard(*parent, registry, sub);
    std::vector<ScheduleEntry> schedule;
    for (auto& r : parent_dash.recommendations) {
      r.action = std::string(actions::kUnfiltered) + " " + r.action;
      r.display_order += 10;
      r.position = schedule.size();
      schedule.push_back(ScheduleEntry{r.action, r.estimated_cost, schedule.size(), schedule.size()});
    }
    if (options.on_schedule) options.on_schedule(schedule);
    for (const auto& r : parent_dash.recommendations) deliver(r);
    dash.recommendations = std::move(parent_dash.recommendations);
    dash.diagnostics.push_back("too few rows; showing recommendations for the unfiltered parent frame");
    return dash;
  }

  auto actions = registry.snapshot();
  std::vector<Prepared> prepared;
  for (std::size_t i = 0; i < actions->size(); ++i) {
    const auto& a = (*actions)[i];
    if (!runs_on(a, path)) continue;
    bool triggered = false;
    try {
      triggered = !a.trigger || a.trigger(ctx);
    } catch (const std::exception& e) {
      dash.diagnostics.push_back("trigger of '" + a.name + "' failed: " + e.what());
    }
    if (!triggered) continue;
    auto p = prepare(a, ctx);
    p.registration = i;
    prepared.push_back(std::move(p));
  }
  if (prepared.empty()) dash.diagnostics.push_back("no qualifying columns for any action");

  std::vector<ScheduleEntry> entries;
  for (std::size_t i = 0; i < prepared.size(); ++i)
    entries.push_back(ScheduleEntry{prepared[i].action->name, prepared[i].cost, prepared[i].registration, 0});
  auto schedule = order_schedule(entries);
  if (options.on_schedule) options.on_schedule(schedule);

  std::vector<std::size_t> start_order;  // indexes into prepared
  for (const auto& e : schedule)
    for (std::size_t i = 0; i < prepared.size(); ++i)
      if (prepared[i].registration == e.registration) start_order.push_back(i);

  std::vector<std::optional<Recommendation>> results(prepared.size());
  auto run_one = [&](std::size_t i, std::size_t position) {
    Recommendation r;
    try {
      r = run_prepared(std::move(prepared[i]), ctx, frame, options);
    } catch (const std::exception& e) {
      r = Recommendation{};
      r.action = (*actions)[schedule[position].registration].name;
      r.diagnostics.push_back(std::string("action failed: ") + e.what());
      r.display_order = (*actions)[schedule[position].registration].display_order;
      r.estimated_cost = schedule[position].estimated_cost;
    }
    r.position = position;
    return r;
  };

  if (cfg.async && options.pool && prepared.size() > 1) {
    std::mutex mu;
    std::condition_variable cv;
    std::size_t remaining = prepared.size();
    for (std::size_t pos = 0; pos < start_order.size(); ++pos) {
      std::size_t i = start_order[pos];
      options.pool->submit([&, i, pos] {
        auto r = run_one(i, pos);
        deliver(r);
        std::lock_guard lock(mu);
        results[i] = std::move(r);
        if (--remaining == 0) cv.notify_all();
      });
    }
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return remaining == 0; });
  } else {
    // Synchronous: fixed display order.
    std::vector<std::size_t> order(prepared.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
      return prepared[a].action->display_order < prepared[b].action->display_order;
    });
    for (auto i : order) {
      std::size_t pos = static_cast<std::size_t>(std::find(start_order.begin(), start_order.end(), i) - start_order.begin());
      auto r = run_one(i, pos);
      deliver(r);
      results[i] = std::move(r);
    }
  }

  for (auto& r : results) dash.recommendations.push_back(std::move(*r));
  std::stable_sort(dash.recommendations.begin(), dash.recommendations.end(),
                   [](const auto& a, const auto& b) { return a.display_order < b.display_order; });
  if (ctx.intent_specs.size() == 1)
    if (const auto* cur = dash.find(actions::kCurrent); cur && !cur->vises.empty()) dash.current = cur->vises.front();
  return dash;
}

}  // namespace luxen
