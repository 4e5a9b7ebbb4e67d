#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "luxen/compiler.hpp"
#include "luxen/score.hpp"
#include "luxen/vis.hpp"
#include "support/random_data.hpp"

using namespace luxen;
using namespace luxen::testing;

namespace {

// Country-level wellbeing indicators; every column is left to inference.
std::shared_ptr<Frame> hpi_frame() {
  static const char* countries[] = {"France", "Japan", "Brazil", "Kenya", "Canada", "India", "Peru", "Norway",
                                    "Chile", "Egypt", "Spain", "Mexico", "Ghana", "Nepal", "Italy", "Chad"};
  static const char* regions[] = {"Europe", "Asia", "Americas", "Africa"};
  std::string text = "Country,Region,AvrgLifeExpectancy,Inequality,HappyPlanetIndex,Footprint\n";
  for (int i = 0; i < 16; ++i) {
    double life = 55 + (i * 7) % 30 + 0.5;
    double ineq = 0.45 - life / 200 + ((i * 5) % 7) / 100.0;
    text += std::string(countries[i]) + "," + regions[i % 4] + "," + std::to_string(life) + "," + std::to_string(ineq) + "," +
            std::to_string(20 + (i * 11) % 25 + 0.25) + "," + std::to_string(1.5 + (i % 5) * (i % 3) * 0.7) + "\n";
  }
  return csv_frame(text);
}

Action even_bars() {
  Action a;
  a.name = "EvenBars";
  a.kind = ScoreKind::none;
  a.trigger = [](const ActionContext& ctx) {
    for (const auto& c : ctx.metadata().columns)
      if (c.semantic == SemanticType::nominal && c.cardinality > 1) return true;
    return false;
  };
  a.generate = [](const ActionContext& ctx, std::vector<std::string>&) {
    std::vector<Candidate> out;
    for (const auto& c : ctx.metadata().columns) {
      if (c.semantic != SemanticType::nominal || c.cardinality < 2) continue;
      auto specs = compile_intent(parse_intent_list("\"" + c.name + "\""), ctx.metadata());
      if (specs.empty()) continue;
      Candidate cand;
      cand.spec = specs[0];
      auto data = process_vis(cand.spec, ctx.frame());
      const auto* counts = data.find(kCountField);
      cand.score = counts ? 1.0 - deviation_from_uniform(counts->numbers()) : 0.0;
      cand.scored = true;
      out.push_back(std::move(cand));
    }
    return out;
  };
  return a;
}

const Recommendation& require(const Dashboard& d, const std::string& action) {
  const auto* r = d.find(action);
  if (!r) throw std::runtime_error("missing action " + action);
  return *r;
}

bool has_action(const Dashboard& d, const std::string& action) { return d.find(action) != nullptr; }

}  // namespace

TEST(Registry, CustomActionAppearsWhenTriggered) {
  Registry reg;
  reg.register_action(even_bars());
  auto f = hpi_frame();
  auto d = generate_dashboard(*f, reg, sync_options());
  const auto& r = require(d, "EvenBars");
  EXPECT_FALSE(r.vises.empty());
  EXPECT_EQ(d.recommendations.back().action, "EvenBars");
  for (std::size_t i = 1; i < r.vises.size(); ++i) EXPECT_GE(*r.vises[i - 1].score, *r.vises[i].score);

  auto numbers = csv_frame("a,b\n1.5,2.5\n2.5,3.5\n3.5,1.5\n4.5,0.5\n5.5,9.5\n6.5,2.5");
  EXPECT_FALSE(has_action(generate_dashboard(*numbers, reg, sync_options()), "EvenBars"));
}

TEST(Registry, DuplicateNameIsRejected) {
  Registry reg;
  auto dup = even_bars();
  dup.name = actions::kCorrelation;
  EXPECT_THROW(reg.register_action(dup), InvalidArgument);
  EXPECT_TRUE(reg.contains(actions::kCorrelation));
  EXPECT_EQ(reg.snapshot()->size(), default_actions().size());
}

TEST(Registry, NeverTriggeredActionIsSilent) {
  Registry reg;
  auto a = even_bars();
  a.name = "Never";
  a.trigger = [](const ActionContext&) { return false; };
  reg.register_action(a);
  auto f = hpi_frame();
  auto d = generate_dashboard(*f, reg, sync_options());
  EXPECT_FALSE(has_action(d, "Never"));
  EXPECT_TRUE(d.diagnostics.empty());
}

TEST(Registry, ReplaceKeepsSlot) {
  Registry reg;
  auto before = reg.snapshot();
  auto slot = std::find_if(before->begin(), before->end(), [](const Action& a) { return a.name == actions::kDistribution; }) -
              before->begin();
  auto a = (*before)[slot];
  a.prunable = false;
  reg.replace_action(a);
  auto after = reg.snapshot();
  EXPECT_EQ((*after)[slot].name, actions::kDistribution);
  EXPECT_FALSE((*after)[slot].prunable);
  auto missing = even_bars();
  EXPECT_THROW(reg.replace_action(missing), InvalidArgument);
}

TEST(Dashboard, UntypedFrameGetsOverviewTabs) {
  auto f = hpi_frame();
  auto d = dashboard(*f);
  for (const char* a : {actions::kCorrelation, actions::kDistribution, actions::kOccurrence, actions::kGeographic})
    EXPECT_TRUE(has_action(d, a)) << a;
  EXPECT_FALSE(has_action(d, actions::kTemporal));
  EXPECT_FALSE(d.current.has_value());
  EXPECT_EQ(require(d, actions::kGeographic).vises[0].spec.mark, Mark::map);
}

TEST(Dashboard, IntentGivesCurrentEnhanceFilter) {
  auto f = hpi_frame();
  f->set_intent(parse_intent_list("AvrgLifeExpectancy,Inequality"));
  auto d = dashboard(*f);
  ASSERT_TRUE(d.current.has_value());
  EXPECT_EQ(d.current->spec.mark, Mark::scatter);
  EXPECT_EQ(action_names(d), (std::vector<std::string>{actions::kCurrent, actions::kEnhance, actions::kFilter}));
  bool region = false;
  for (const auto& v : require(d, actions::kEnhance).vises)
    if (v.spec.mark == Mark::color_scatter && v.spec.color && v.spec.color->field == "Region") region = true;
  EXPECT_TRUE(region);
  for (const auto& v : require(d, actions::kFilter).vises) {
    ASSERT_EQ(v.spec.filters.size(), 1u);
    EXPECT_EQ(v.spec.filters[0].op, FilterOp::eq);
  }
}

TEST(Dashboard, IntentChangeLeavesFrameAlone) {
  auto f = hpi_frame();
  auto version = f->version();
  auto hash = f->snapshot()->content_hash();
  f->set_intent(parse_intent_list("Region"));
  dashboard(*f);
  f->set_intent(parse_intent_list("Inequality"));
  dashboard(*f);
  EXPECT_EQ(f->version(), version);
  EXPECT_EQ(f->snapshot()->content_hash(), hash);
  EXPECT_EQ(f->intent_version(), 2u);
}

TEST(Correlation, PerfectPairFirstConstantLast) {
  std::string text = "a,b,c,flat\n";
  double av[] = {1.5, 2.25, 3.75, 4.5, 6.0, 7.5, 8.25, 9.0};
  double bv[] = {3.0, 1.0, 4.0, 1.5, 5.0, 9.0, 2.5, 6.0};
  for (int i = 0; i < 8; ++i)
    text += std::to_string(av[i]) + "," + std::to_string(bv[i]) + "," + std::to_string(2 * av[i]) + ",7.5\n";
  auto f = csv_frame(text);
  auto d = dashboard(*f);
  const auto& r = require(d, actions::kCorrelation);
  ASSERT_EQ(r.vises.size(), 6u);
  auto first = r.vises.front().spec.attributes();
  std::sort(first.begin(), first.end());
  EXPECT_EQ(first, (std::vector<std::string>{"a", "c"}));
  EXPECT_NEAR(*r.vises.front().score, 1.0, 1e-12);
  for (std::size_t i = 3; i < 6; ++i) {
    auto attrs = r.vises[i].spec.attributes();
    EXPECT_NE(std::find(attrs.begin(), attrs.end(), "flat"), attrs.end());
    EXPECT_FALSE(r.vises[i].score.has_value());
  }
}

TEST(Correlation, ThreeColumnsThreePairs) {
  auto f = csv_frame("x,y,z\n1.5,2.5,0.5\n2.5,1.5,3.5\n3.5,4.5,1.5\n4.5,3.5,2.5\n");
  auto d = dashboard(*f);
  const auto& r = require(d, actions::kCorrelation);
  ASSERT_EQ(r.vises.size(), 3u);
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& v : r.vises) {
    auto a = v.spec.attributes();
    ASSERT_EQ(a.size(), 2u);
    EXPECT_EQ(pairs.count({a[1], a[0]}), 0u);
    pairs.insert({a[0], a[1]});
  }
}

TEST(Univariate, SizesByType) {
  std::string text = "q1,q2,n1,n2,n3,t\n";
  for (int i = 0; i < 30; ++i)
    text += std::to_string(i * 1.5) + "," + std::to_string((i * 7) % 11 + 0.5) + ",a" + std::to_string(i % 3) + ",b" +
            std::to_string(i % 4) + ",c" + std::to_string(i % 2) + ",2020-01-" + (i < 9 ? "0" : "") +
            std::to_string(i + 1) + "\n";
  auto f = csv_frame(text);
  auto d = dashboard(*f);
  // Two quantitative columns also form one Correlation pair.
  EXPECT_EQ(action_names(d), (std::vector<std::string>{actions::kCorrelation, actions::kDistribution,
                                                       actions::kOccurrence, actions::kTemporal}));
  EXPECT_EQ(require(d, actions::kDistribution).vises.size(), 2u);
  EXPECT_EQ(require(d, actions::kOccurrence).vises.size(), 3u);
  EXPECT_EQ(require(d, actions::kTemporal).vises.size(), 1u);
  const auto& occ = require(d, actions::kOccurrence).vises;
  for (std::size_t i = 1; i < occ.size(); ++i) EXPECT_LE(occ[i - 1].rank_hint, occ[i].rank_hint);
  EXPECT_EQ(require(d, actions::kTemporal).vises[0].spec.mark, Mark::line);
}

TEST(Univariate, AllQuantitativeHasNoOccurrence) {
  auto f = csv_frame("a,b\n1.5,2.5\n2.5,3.5\n3.5,1.5\n4.5,0.5\n5.5,9.5\n6.5,2.5");
  auto d = dashboard(*f);
  EXPECT_FALSE(has_action(d, actions::kOccurrence));
  EXPECT_TRUE(has_action(d, actions::kDistribution));
}

TEST(Univariate, SkewedColumnRanksFirst) {
  std::string text = "sym,skew\n";
  for (int i = 0; i < 40; ++i) text += std::to_string(i * 0.5) + "," + std::to_string(std::pow(1.2, i)) + "\n";
  auto f = csv_frame(text);
  auto d = dashboard(*f);
  const auto& r = require(d, actions::kDistribution);
  ASSERT_EQ(r.vises.size(), 2u);
  EXPECT_EQ(r.vises[0].spec.x->field, "skew");
}

TEST(IntentActions, FilterEnumeratesDepartmentValues) {
  std::string text = "Age,Department\n";
  const char* depts[] = {"Sales", "Research", "HR"};
  for (int i = 0; i < 120; ++i) text += std::to_string(20.5 + (i * 13) % 120) + "," + depts[i % 3] + "\n";
  auto f = csv_frame(text);
  f->set_intent(parse_intent_list("Age"));
  auto d = dashboard(*f);
  const auto& r = require(d, actions::kFilter);
  std::set<std::string> values;
  for (const auto& v : r.vises)
    for (const auto& c : v.spec.filters)
      if (c.column == "Department") values.insert(c.value);
  EXPECT_EQ(values, (std::set<std::string>{"HR", "Research", "Sales"}));
  EXPECT_EQ(r.vises.size(), 3u);
}

TEST(IntentActions, ThreeAxesLeaveEnhanceEmpty) {
  auto f = hpi_frame();
  f->set_intent(parse_intent_list("AvrgLifeExpectancy,Inequality,Region"));
  auto d = dashboard(*f);
  ASSERT_TRUE(d.current.has_value());
  const auto* e = d.find(actions::kEnhance);
  EXPECT_TRUE(e == nullptr || e->vises.empty());
}

TEST(IntentActions, MultiSpecIntentListsItsVisualizations) {
  auto f = hpi_frame();
  f->set_intent(parse_intent_list("Region,AvrgLifeExpectancy|Inequality|Footprint"));
  auto d = dashboard(*f);
  EXPECT_FALSE(d.current.has_value());
  ASSERT_FALSE(d.recommendations.empty());
  EXPECT_EQ(d.recommendations[0].action, actions::kCurrent);
  EXPECT_EQ(d.recommendations[0].vises.size(), 3u);
}

TEST(Structure, SeriesMarks) {
  auto q = csv_frame("v\n1.5\n2.5\n7.5\n3.5\n4.5\n9.5");
  auto dq = dashboard(*q);
  ASSERT_EQ(action_names(dq), std::vector<std::string>{actions::kSeries});
  EXPECT_EQ(dq.recommendations[0].vises[0].spec.mark, Mark::histogram);
  auto n = csv_frame("g\na\nb\na\nc\nb\na");
  auto dn = dashboard(*n);
  ASSERT_EQ(action_names(dn), std::vector<std::string>{actions::kSeries});
  EXPECT_EQ(dn.recommendations[0].vises[0].spec.mark, Mark::bar);
}

TEST(Structure, PivotRowsBecomeLines) {
  std::string text = "State,Date,Cases\n";
  for (int s = 0; s < 50; ++s)
    for (int day = 1; day <= 6; ++day)
      text += "S" + std::to_string(s) + ",2020-03-0" + std::to_string(day) + "," + std::to_string(s * day + 1) + "\n";
  auto f = csv_frame(text);
  auto p = apply_transform(f, Transform{Pivot{"State", "Date", "Cases", Aggregation::sum}});
  ASSERT_EQ(p->rows(), 50u);
  auto d = dashboard(*p);
  const auto& r = require(d, actions::kIndex);
  EXPECT_EQ(r.vises.size(), kDefaultTopK);
  for (const auto& v : r.vises) {
    EXPECT_EQ(v.spec.structure, StructureKind::row_wise);
    EXPECT_EQ(v.spec.mark, Mark::line);
  }
}

TEST(History, SmallFilteredFrameShowsParent) {
  std::string text = "a,b,g\n";
  for (int i = 0; i < 40; ++i) text += std::to_string(i * 1.5) + "," + std::to_string((i * 7) % 13 + 0.5) + ",g" + std::to_string(i % 3) + "\n";
  auto f = csv_frame(text);
  auto filtered = apply_transform(f, Transform{FilterRows{{Comparison{"g", FilterOp::eq, "g1"}}}});
  auto head = apply_transform(filtered, Transform{HeadTail{3, false}});
  auto d = dashboard(*head);
  ASSERT_FALSE(d.recommendations.empty());
  for (const auto& r : d.recommendations) EXPECT_EQ(r.action.rfind(actions::kUnfiltered, 0), 0u) << r.action;
  auto parent = dashboard(*filtered);
  ASSERT_EQ(d.recommendations.size(), parent.recommendations.size());
  for (std::size_t i = 0; i < d.recommendations.size(); ++i)
    EXPECT_EQ(d.recommendations[i].action, std::string(actions::kUnfiltered) + " " + parent.recommendations[i].action);
  EXPECT_EQ(dispatch_path(*head->snapshot(), false), Dispatch::history);
}

TEST(History, MissingParentGivesDiagnostic) {
  auto f = csv_frame("a,b\n1.5,2\n2.5,3\n3.5,4\n4.5,5\n5.5,6\n6.5,7");
  auto head = apply_transform(f, Transform{HeadTail{2, false}});
  f.reset();
  auto d = dashboard(*head);
  ASSERT_EQ(d.recommendations.size(), 1u);
  EXPECT_TRUE(d.recommendations[0].vises.empty());
  EXPECT_FALSE(d.recommendations[0].diagnostics.empty());
}

TEST(History, SmallLoadedFrameTakesNormalPath) {
  auto f = csv_frame("a,b\n1.5,2.5\n2.5,0.5\n3.5,1.5");
  EXPECT_EQ(dispatch_path(*f->snapshot(), false), Dispatch::overview);
  EXPECT_TRUE(has_action(dashboard(*f), actions::kCorrelation));
}

TEST(History, LargeFilteredFrameTakesNormalPath) {
  std::string text = "a,b\n";
  for (int i = 0; i < 2000; ++i) text += std::to_string(i) + ".5," + std::to_string(i % 2) + "\n";
  auto f = csv_frame(text);
  auto g = apply_transform(f, Transform{FilterRows{{Comparison{"b", FilterOp::eq, "1"}}}});
  EXPECT_EQ(g->rows(), 1000u);
  EXPECT_EQ(dispatch_path(*g->snapshot(), false), Dispatch::overview);
}

TEST(Dashboard, NoQualifyingColumns) {
  auto f = csv_frame("a,b\n,\n,\n,\n,\n,\n,\n");
  auto d = dashboard(*f);
  EXPECT_TRUE(d.recommendations.empty());
  EXPECT_FALSE(d.diagnostics.empty());
}

TEST(Properties, KTruncationAndDisplayOrder) {
  Gen g(41);
  auto order = default_actions();
  for (int iter = 0; iter < 30; ++iter) {
    auto f = random_frame(g, FrameShape{.max_rows = 300, .max_cols = 12, .min_rows = 10, .min_cols = 2});
    std::size_t k = g.between(1, 20);
    auto d = dashboard(*f, k);
    int last = -1;
    for (const auto& r : d.recommendations) {
      EXPECT_LE(r.vises.size(), k) << r.action;
      EXPECT_GE(r.display_order, last);
      last = r.display_order;
      if (r.action == actions::kCorrelation) {
        std::set<std::pair<std::string, std::string>> seen;
        for (const auto& v : r.vises) {
          auto a = v.spec.attributes();
          EXPECT_EQ(seen.count({a[1], a[0]}), 0u);
          seen.insert({a[0], a[1]});
        }
      }
    }
  }
}
