#include "luxen/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

#include "luxen/stats.hpp"

namespace luxen {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(OptLevel level) noexcept {
  switch (level) {
    case OptLevel::no_opt: return "no-opt";
    case OptLevel::wflow: return "wflow";
    case OptLevel::wflow_prune: return "wflow+prune";
    case OptLevel::all_opt: return "all-opt";
  }
  return "?";
}

std::optional<OptLevel> parse_opt_level(std::string_view text) noexcept {
  for (auto l : kAllOptLevels)
    if (to_string(l) == text) return l;
  return std::nullopt;
}

OptimizerConfig config_for(OptLevel level, OptimizerConfig base) {
  base.wflow = level != OptLevel::no_opt;
  base.prune = level == OptLevel::wflow_prune || level == OptLevel::all_opt;
  base.async = level == OptLevel::all_opt;
  return base;
}

std::unique_ptr<Engine> make_engine(OptLevel level, OptimizerConfig base) {
  auto cfg = config_for(level, base);
  auto engine = std::make_unique<Engine>(cfg);
  engine->eager_processing = !cfg.prune;
  return engine;
}

std::string_view to_string(CellKind kind) noexcept {
  switch (kind) {
    case CellKind::print_frame: return "print_frame";
    case CellKind::print_series: return "print_series";
    case CellKind::transform: return "transform";
    case CellKind::set_intent: return "set_intent";
  }
  return "?";
}

std::string_view cell_label(CellKind kind) noexcept {
  switch (kind) {
    case CellKind::print_frame: return "frame";
    case CellKind::print_series: return "series";
    default: return "none";
  }
}

namespace {

WorkCell print_frame(std::string var, std::string note = {}) {
  WorkCell c;
  c.kind = CellKind::print_frame;
  c.target = std::move(var);
  c.note = std::move(note);
  return c;
}

WorkCell print_series(std::string var, std::string column) {
  WorkCell c;
  c.kind = CellKind::print_series;
  c.target = std::move(var);
  c.column = std::move(column);
  return c;
}

WorkCell transform(std::string target, std::string source, json op, std::string note = {}) {
  WorkCell c;
  c.kind = CellKind::transform;
  c.target = std::move(target);
  c.source = std::move(source);
  c.transform = std::move(op);
  c.note = std::move(note);
  return c;
}

WorkCell set_intent(std::string var, std::optional<IntentSpec> intent) {
  WorkCell c;
  c.kind = CellKind::set_intent;
  c.target = std::move(var);
  c.intent = std::move(intent);
  return c;
}

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct PrintTiming {
  double total = 0;
  double first = 0;
};

PrintTiming timed_print(Engine& engine, const std::shared_ptr<Frame>& frame) {
  auto t0 = Clock::now();
  double first = -1;
  auto s = engine.stream(frame);
  s->replay([&](const StreamEvent& ev) {
    if (ev.kind == StreamEvent::Kind::recommendation && first < 0) first = since(t0);
    return true;
  });
  PrintTiming t;
  t.total = since(t0);
  t.first = first < 0 ? t.total : first;
  if (!s->error().empty()) throw Error("dashboard failed: " + s->error());
  return t;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

const Action* find_action(const std::vector<Action>& all, std::string_view name) {
  for (const auto& a : all)
    if (a.name == name) return &a;
  return nullptr;
}

}  // namespace

std::vector<WorkCell> default_workload(const SyntheticLayout& layout) {
  if (layout.quantitative < 8 || layout.nominal < 4)
    throw InvalidArgument("default workload needs at least 8 quantitative and 4 nominal columns");
  std::vector<WorkCell> w;
  w.push_back(print_frame("df", "initial print"));
  w.push_back(print_series("df", "q0"));
  w.push_back(transform("df2", "df", {{"op", "filter"}, {"column", "n1"}, {"value", "v0"}}));
  w.push_back(print_frame("df2"));
  w.push_back(print_series("df2", "q1"));
  w.push_back(transform("df3", "df",
                        {{"op", "group_aggregate"}, {"keys", {"n2"}}, {"aggregations", {{"q0", "mean"}, {"q1", "mean"}}}}));
  w.push_back(print_frame("df3", "aggregated"));
  w.push_back(print_frame("df", "repeat print"));
  w.push_back(transform("df", "df", {{"op", "rename"}, {"mapping", {{"q2", "q2_renamed"}}}, {"inplace", true}},
                        "rename trigger"));
  w.push_back(print_frame("df", "after rename"));
  w.push_back(transform("df", "df", {{"op", "set_column"}, {"name", "q_new"}, {"source", "q3"}, {"arith", "*"}, {"operand", 2}},
                        "column-update trigger"));
  w.push_back(print_frame("df", "after column update"));
  w.push_back(transform("df", "df", {{"op", "inplace_modify"}, {"marker", "dropna"}}, "inplace trigger"));
  w.push_back(print_frame("df", "after inplace modify"));
  w.push_back(print_series("df", "q4"));
  w.push_back(transform("df4", "df",
                        {{"op", "project"},
                         {"columns", {"q0", "q1", "q3", "q4", "q5", "q6", "q7", "n1", "n2", "q_new"}}}));
  w.push_back(print_frame("df4"));
  w.push_back(set_intent("df", parse_intent_list("q0,q1")));
  w.push_back(print_frame("df", "with intent"));
  w.push_back(print_series("df", "q5"));
  w.push_back(transform("df5", "df", {{"op", "filter"}, {"column", "n2"}, {"cmp", "!="}, {"value", "v0"}}));
  w.push_back(transform("df6", "df5", {{"op", "head"}, {"n", 3}}));
  w.push_back(print_frame("df6", "small frame"));
  w.push_back(print_series("df5", "q6"));
  w.push_back(set_intent("df", std::nullopt));
  w.push_back(print_frame("df", "intent cleared"));
  w.push_back(transform("df7", "df", {{"op", "filter"}, {"column", "n0"}, {"value", "v0"}}));
  w.push_back(print_frame("df7"));
  w.push_back(print_series("df7", "q7"));
  w.push_back(transform("df8", "df",
                        {{"op", "pivot"}, {"index", "n2"}, {"columns", "n1"}, {"values", "q0"}, {"aggregation", "mean"}}));
  w.push_back(print_frame("df8", "pivoted"));
  w.push_back(print_frame("df", "repeat print"));
  w.push_back(transform("df9", "df", {{"op", "group_aggregate"}, {"keys", {"n3"}}, {"aggregations", {{"q1", "sum"}}}}));
  w.push_back(print_series("df4", "q3"));
  w.push_back(transform("df10", "df", {{"op", "filter"}, {"column", "n1"}, {"cmp", "!="}, {"value", "v0"}}));
  w.push_back(transform("df4", "df4", {{"op", "inplace_modify"}, {"marker", "sort_values:q0"}}));
  return w;
}

double RunReport::mean_cell_seconds() const {
  std::vector<double> t;
  for (const auto& c : cells) t.push_back(c.seconds);
  return mean_of(t);
}

std::vector<CellSummary> RunReport::summaries() const {
  std::vector<CellSummary> out;
  for (std::string_view label : {"frame", "series", "none", "all"}) {
    CellSummary s;
    s.label = std::string(label);
    std::vector<double> t, f;
    for (const auto& c : cells) {
      if (label != "all" && cell_label(c.kind) != label) continue;
      t.push_back(c.seconds);
      f.push_back(c.first_result_seconds);
      s.dashboard_computations += c.dashboard_computations;
      s.metadata_computations += c.metadata_computations;
      s.scoring_operations += c.scoring_operations;
    }
    s.count = t.size();
    s.mean = mean_of(t);
    s.median = median_of(t);
    s.mean_first_result = mean_of(f);
    out.push_back(s);
  }
  return out;
}

void BenchConfig::validate() const {
  data.validate();
  if (repetitions < 1) throw InvalidArgument("repetitions must be at least 1");
  if (levels.empty()) throw InvalidArgument("at least one opt level is required");
  if (optimizer.k == 0) throw InvalidArgument("k must be positive");
  if (optimizer.sample_cap == 0) throw InvalidArgument("sample cap must be positive");
}

RunReport run_workload(const FrameData& data, const std::vector<WorkCell>& workload, OptLevel level,
                       const OptimizerConfig& base) {
  auto engine = make_engine(level, base);
  bool eager = level == OptLevel::no_opt;
  std::map<std::string, std::shared_ptr<Frame>> env;
  env["df"] = Frame::create(data);
  auto var = [&](const std::string& name) {
    auto it = env.find(name);
    if (it == env.end()) throw InvalidArgument("workload refers to unknown variable '" + name + "'");
    return it->second;
  };

  RunReport report;
  report.level = level;
  auto& st = stats();
  for (std::size_t i = 0; i < workload.size(); ++i) {
    const auto& cell = workload[i];
    CellResult r;
    r.index = i;
    r.kind = cell.kind;
    r.note = cell.note;
    std::uint64_t d0 = st.dashboard_computations, m0 = st.metadata_computations, s0 = st.scoring_operations;
    auto t0 = Clock::now();
    std::optional<PrintTiming> print;
    switch (cell.kind) {
      case CellKind::print_frame:
        print = timed_print(*engine, var(cell.target));
        break;
      case CellKind::print_series: {
        Transform t;
        t.op = ProjectColumns{{cell.column}};
        auto series = apply_transform(var(cell.target), t);
        print = timed_print(*engine, series);
        break;
      }
      case CellKind::transform: {
        auto out = apply_transform(var(cell.source), transform_from_json(cell.transform));
        env[cell.target] = out;
        if (eager) print = timed_print(*engine, out);
        break;
      }
      case CellKind::set_intent: {
        auto f = var(cell.target);
        f->set_intent(cell.intent);
        if (eager) print = timed_print(*engine, f);
        break;
      }
    }
    r.seconds = since(t0);
    r.first_result_seconds = print ? r.seconds - print->total + print->first : r.seconds;
    r.dashboard_computations = st.dashboard_computations - d0;
    r.metadata_computations = st.metadata_computations - m0;
    r.scoring_operations = st.scoring_operations - s0;
    report.cells.push_back(std::move(r));
  }
  return report;
}

RecallResult measure_recall(const std::shared_ptr<Frame>& frame, std::string_view action_name,
                            const OptimizerConfig& config) {
  auto all = default_actions();
  const Action* action = find_action(all, action_name);
  if (!action) throw InvalidArgument("unknown action '" + std::string(action_name) + "'");

  auto snap = frame->snapshot();
  GenerateOptions exact;
  exact.config = config;
  exact.config.prune = false;
  exact.config.wflow = true;
  GenerateOptions approx = exact;
  approx.config.prune = true;

  ActionContext ctx;
  ctx.data = snap;
  ctx.meta = frame->metadata_for(snap);
  ctx.config = &exact.config;

  RecallResult r;
  r.action = std::string(action_name);
  r.k = config.k;
  std::vector<std::string> diags;
  r.candidates = action->generate(ctx, diags).size();

  auto truth = run_action(*action, ctx, *frame, exact);
  auto& st = stats();
  std::uint64_t a0 = st.approximate_scores;
  st.max_rows_per_approximate_score = 0;
  auto pruned = run_action(*action, ctx, *frame, approx);
  r.pruned = st.approximate_scores > a0;
  r.max_sample_rows = st.max_rows_per_approximate_score;

  std::vector<std::vector<std::string>> expected, got;
  for (const auto& v : truth.vises) expected.push_back(v.spec.sort_key());
  for (const auto& v : pruned.vises) got.push_back(v.spec.sort_key());
  if (expected.empty()) return r;
  std::size_t hit = 0;
  for (const auto& e : expected)
    if (std::find(got.begin(), got.end(), e) != got.end()) ++hit;
  r.recall = static_cast<double>(hit) / static_cast<double>(expected.size());
  return r;
}

double time_single_print(const FrameData& data, OptLevel level, const OptimizerConfig& base,
                         std::size_t repetitions) {
  std::vector<double> times;
  for (std::size_t r = 0; r < std::max<std::size_t>(1, repetitions); ++r) {
    auto frame = Frame::create(data);
    frame->metadata();
    auto engine = make_engine(level, base);
    auto t = timed_print(*engine, frame);
    times.push_back(level == OptLevel::all_opt ? t.first : t.total);
  }
  return median_of(std::move(times));
}

PowerFit fit_power(const std::vector<double>& x, const std::vector<double>& y, double c_min, double c_max,
                   double c_step) {
  if (x.size() != y.size() || x.size() < 3) throw InvalidArgument("power fit needs at least 3 points");
  PowerFit best;
  best.sse = std::numeric_limits<double>::infinity();
  double n = static_cast<double>(x.size());
  double ybar = std::accumulate(y.begin(), y.end(), 0.0) / n;
  for (double c = c_min; c <= c_max + 1e-12; c += c_step) {
    std::vector<double> X(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) X[i] = std::pow(x[i], c);
    double xbar = std::accumulate(X.begin(), X.end(), 0.0) / n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxy += (X[i] - xbar) * (y[i] - ybar);
      sxx += (X[i] - xbar) * (X[i] - xbar);
    }
    if (sxx <= 0) continue;
    double b = sxy / sxx, a = ybar - b * xbar, sse = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double e = y[i] - (a + b * X[i]);
      sse += e * e;
    }
    if (sse < best.sse) best = PowerFit{a, b, c, sse};
  }
  return best;
}

BenchReport run_benchmark(const BenchConfig& config) {
  config.validate();
  BenchReport report;
  report.config = config;
  auto data = make_synthetic(config.data);
  std::vector<WorkCell> workload;
  if (config.run_workload)
    workload = config.workload.empty() ? default_workload(synthetic_layout(config.data)) : config.workload;
  for (auto level : config.levels) {
    if (!config.run_workload) break;
    for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
      auto run = run_workload(data, workload, level, config.optimizer);
      run.repetition = rep;
      report.runs.push_back(std::move(run));
    }
  }
  bool any_prune = std::any_of(config.levels.begin(), config.levels.end(),
                               [](OptLevel l) { return config_for(l).prune; });
  if (config.recall && any_prune) {
    auto frame = Frame::create(data);
    for (const char* a : {actions::kCorrelation, actions::kDistribution})
      report.recall.push_back(measure_recall(frame, a, config.optimizer));
  }
  return report;
}

double BenchReport::mean_cell_seconds(OptLevel level) const {
  std::vector<double> m;
  for (const auto& r : runs)
    if (r.level == level) m.push_back(r.mean_cell_seconds());
  return mean_of(m);
}

ordered_json BenchReport::to_json() const {
  ordered_json j;
  j["data"] = {{"rows", config.data.rows},
               {"cols", config.data.cols},
               {"quantitative", config.data.quantitative},
               {"nominal", config.data.nominal},
               {"temporal", config.data.temporal},
               {"seed", config.data.seed}};
  j["optimizer"] = {{"sample_cap", config.optimizer.sample_cap},
                    {"k", config.optimizer.k},
                    {"margin", config.optimizer.margin},
                    {"parallelism", config.optimizer.workers()}};
  j["repetitions"] = config.repetitions;
  ordered_json runs_j = ordered_json::array();
  for (const auto& r : runs) {
    ordered_json rj;
    rj["level"] = to_string(r.level);
    rj["repetition"] = r.repetition;
    rj["mean_cell_seconds"] = r.mean_cell_seconds();
    ordered_json sums = ordered_json::array();
    for (const auto& s : r.summaries())
      sums.push_back({{"cell_type", s.label},
                      {"count", s.count},
                      {"mean_seconds", s.mean},
                      {"median_seconds", s.median},
                      {"mean_first_result_seconds", s.mean_first_result},
                      {"dashboard_computations", s.dashboard_computations},
                      {"metadata_computations", s.metadata_computations},
                      {"scoring_operations", s.scoring_operations}});
    rj["summary"] = std::move(sums);
    ordered_json cells = ordered_json::array();
    for (const auto& c : r.cells)
      cells.push_back({{"index", c.index},
                       {"kind", to_string(c.kind)},
                       {"note", c.note},
                       {"seconds", c.seconds},
                       {"first_result_seconds", c.first_result_seconds},
                       {"dashboard_computations", c.dashboard_computations},
                       {"metadata_computations", c.metadata_computations},
                       {"scoring_operations", c.scoring_operations}});
    rj["cells"] = std::move(cells);
    runs_j.push_back(std::move(rj));
  }
  j["runs"] = std::move(runs_j);
  ordered_json rec = ordered_json::array();
  for (const auto& r : recall)
    rec.push_back({{"action", r.action},
                   {"k", r.k},
                   {"candidates", r.candidates},
                   {"recall", r.recall},
                   {"pruned", r.pruned},
                   {"max_sample_rows", r.max_sample_rows}});
  j["recall"] = std::move(rec);
  return j;
}

std::string BenchReport::to_table() const {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"level", "rep", "cells", "n", "mean ms", "median ms", "first ms", "dashboards", "metadata", "scoring"});
  auto ms = [](double s) {
    std::ostringstream o;
    o << std::fixed << std::setprecision(2) << s * 1000.0;
    return o.str();
  };
  for (const auto& r : runs)
    for (const auto& s : r.summaries())
      rows.push_back({std::string(to_string(r.level)), std::to_string(r.repetition), s.label, std::to_string(s.count),
                      ms(s.mean), ms(s.median), ms(s.mean_first_result), std::to_string(s.dashboard_computations),
                      std::to_string(s.metadata_computations), std::to_string(s.scoring_operations)});
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& row : rows)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << "  ";
      if (i < 3) out << std::left << std::setw(static_cast<int>(width[i])) << row[i];
      else out << std::right << std::setw(static_cast<int>(width[i])) << row[i];
    }
    out << '\n';
  }
  for (const auto& r : recall)
    out << "Recall@" << r.k << " " << r.action << ": " << std::fixed << std::setprecision(3) << r.recall
        << (r.pruned ? "" : " (not pruned)") << '\n';
  return out.str();
}

}  // namespace luxen
