#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "luxen/compiler.hpp"
#include "luxen/score.hpp"
#include "luxen/spec_doc.hpp"
#include "luxen/vis.hpp"
#include "support/random_data.hpp"

using namespace luxen;
using namespace luxen::testing;

namespace {

CompiledVisSpec compile_one(const FrameData& d, const std::string& intent) {
  auto specs = compile_intent(parse_intent_list(intent), compute_metadata(d));
  if (specs.size() != 1) throw std::runtime_error("intent '" + intent + "' compiled to " + std::to_string(specs.size()));
  return specs[0];
}

Encoding quantitative_bins(const std::string& field, int bins, double lo, double hi) {
  Encoding e;
  e.field = field;
  e.bins = bins;
  e.extent = std::pair{lo, hi};
  return e;
}

CompiledVisSpec histogram(const std::string& field, int bins, double lo, double hi) {
  CompiledVisSpec s;
  s.mark = Mark::histogram;
  s.x = quantitative_bins(field, bins, lo, hi);
  Encoding c;
  c.aggregate = Aggregation::count;
  s.y = c;
  return s;
}

}  // namespace

TEST(ProcessVis, GroupedMean) {
  auto d = parse_csv("Dept,Sal\nA,10.0\nA,20.0\nB,30.0");
  auto out = process_vis(compile_one(d, "Sal,Dept"), d);
  ASSERT_EQ(out.rows(), 2u);
  const auto* dept = out.find("Dept");
  const auto* sal = out.find("Sal");
  ASSERT_TRUE(dept && sal);
  std::map<std::string, double> got;
  for (std::size_t i = 0; i < out.rows(); ++i) got[dept->labels()[i]] = sal->numbers()[i];
  EXPECT_EQ(got, (std::map<std::string, double>{{"A", 15.0}, {"B", 30.0}}));
  EXPECT_EQ(out.source_rows, 3u);
}

TEST(ProcessVis, TwoBins) {
  auto d = parse_csv("v\n0\n1\n2\n3\n4\n5\n6\n7\n8\n9");
  auto out = process_vis(histogram("v", 2, 0, 10), d);
  ASSERT_EQ(out.rows(), 2u);
  EXPECT_EQ(out.find(kCountField)->numbers(), (std::vector<double>{5, 5}));
  EXPECT_EQ(out.find("v")->numbers(), (std::vector<double>{0, 5}));
  EXPECT_EQ(out.find("v_end")->numbers(), (std::vector<double>{5, 10}));
}

TEST(ProcessVis, NullsAreDropped) {
  auto d = parse_csv("v\n1\n2\n\n3");
  auto out = process_vis(histogram("v", 1, 1, 3), d);
  ASSERT_EQ(out.rows(), 1u);
  EXPECT_EQ(out.find(kCountField)->numbers()[0], 3.0);
  EXPECT_EQ(out.source_rows, 3u);
}

TEST(ProcessVis, FiltersApplyFirst) {
  auto d = parse_csv("g,v\nx,1\ny,2\nx,3\ny,4");
  auto spec = compile_one(d, "g,v>1");
  auto out = process_vis(spec, d);
  std::map<std::string, double> got;
  for (std::size_t i = 0; i < out.rows(); ++i) got[out.find("g")->labels()[i]] = out.find(kCountField)->numbers()[i];
  EXPECT_EQ(got, (std::map<std::string, double>{{"x", 1}, {"y", 2}}));
}

TEST(ProcessVis, CountsAreConservedOnRandomHistograms) {
  Gen g(17);
  for (int iter = 0; iter < 200; ++iter) {
    std::size_t n = g.between(0, 400);
    std::vector<double> v(n);
    std::vector<std::uint8_t> valid(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = g.normal() * 10, valid[i] = g.chance(0.9);
    FrameData d;
    d.rows = n;
    d.columns.push_back(std::make_shared<const Column>(Column::floats("v", v, valid)));
    int bins = static_cast<int>(g.between(1, 20));
    auto out = process_vis(histogram("v", bins, -25, 25), d);
    double total = 0;
    if (!out.empty())
      for (double c : out.find(kCountField)->numbers()) total += c;
    std::size_t expect = 0;
    for (auto b : valid) expect += b;
    EXPECT_EQ(total, static_cast<double>(expect));
  }
}

TEST(ProcessVis, BinIndexBoundaries) {
  EXPECT_EQ(bin_index(0, 0, 10, 2), 0);
  EXPECT_EQ(bin_index(4.999, 0, 10, 2), 0);
  EXPECT_EQ(bin_index(5, 0, 10, 2), 1);
  EXPECT_EQ(bin_index(10, 0, 10, 2), 1);
  EXPECT_EQ(bin_index(-3, 0, 10, 2), 0);
  EXPECT_EQ(bin_index(7, 7, 7, 4), 0);
}

TEST(Pearson, Examples) {
  std::vector<double> x{1, 2, 3}, up{2, 4, 6}, down{6, 4, 2};
  EXPECT_NEAR(*pearson(x, up), 1.0, 1e-12);
  EXPECT_NEAR(*pearson(x, down), -1.0, 1e-12);
  std::vector<double> a{1, 2, 3, 4}, b{1, 3, 2, 4};
  EXPECT_NEAR(*pearson(a, b), 0.8, 1e-12);
}

TEST(Pearson, UndefinedCases) {
  std::vector<double> x{1, 2, 3}, flat{5, 5, 5}, one{1};
  EXPECT_FALSE(pearson(x, flat).has_value());
  EXPECT_FALSE(pearson(one, one).has_value());
  std::vector<double> holes{1, NAN, 3, 4}, other{2, 9, 6, 8};
  EXPECT_NEAR(*pearson(holes, other), *pearson(std::vector<double>{1, 3, 4}, std::vector<double>{2, 6, 8}), 1e-12);
}

TEST(Pearson, SymmetricAndScaleInvariant) {
  Gen g(23);
  for (int iter = 0; iter < 300; ++iter) {
    std::size_t n = g.between(3, 60);
    std::vector<double> x(n), y(n), z(n);
    double a = 0.1 + g.unit() * 100, b = g.normal() * 50;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = g.normal();
      y[i] = 0.5 * x[i] + g.normal();
      z[i] = a * x[i] + b;
    }
    auto r = pearson(x, y);
    ASSERT_TRUE(r);
    EXPECT_NEAR(*pearson(y, x), *r, 1e-12);
    EXPECT_NEAR(*pearson(z, y), *r, 1e-9);
    EXPECT_LE(std::abs(*r), 1.0);
  }
}

TEST(Scores, SkewnessOfSymmetricData) {
  std::vector<double> v{1, 2, 3};
  EXPECT_NEAR(*skewness(v), 0.0, 1e-12);
  auto d = parse_csv("v\n1.5\n2.5\n3.5");
  ScoreContext ctx{ScoreKind::distribution};
  EXPECT_NEAR(*interestingness(histogram("v", 10, 1.5, 3.5), d, ctx), 0.0, 1e-12);
}

TEST(Scores, RightSkewRanksAboveSymmetric) {
  std::vector<double> skewed{1, 1, 1, 1, 2, 2, 3, 10, 40}, flat{1, 2, 3, 4, 5, 6, 7, 8, 9};
  EXPECT_GT(std::abs(*skewness(skewed)), std::abs(*skewness(flat)));
}

TEST(Scores, FilterDistance) {
  // g splits evenly overall; under h = x only "a" remains.
  auto d = parse_csv("g,h\na,x\nb,y\na,x\nb,y");
  auto meta = compute_metadata(d);
  auto base = compile_one(d, "g");
  auto filtered = compile_one(d, "g,h=x");
  ScoreContext ctx{ScoreKind::filter, &base, {}, &meta};
  EXPECT_NEAR(*interestingness(filtered, d, ctx), std::sqrt(0.5), 1e-12);
}

TEST(Scores, DeviationFromUniform) {
  EXPECT_NEAR(deviation_from_uniform(std::vector<double>{1, 1, 1, 1}), 0.0, 1e-12);
  EXPECT_NEAR(deviation_from_uniform(std::vector<double>{1, 0}), std::sqrt(0.5), 1e-12);
  EXPECT_EQ(normalize({0, 0}), (std::vector<double>{0, 0}));
  EXPECT_EQ(normalize({1, 3}), (std::vector<double>{0.25, 0.75}));
}

TEST(Scores, CorrelationDelegatesToPearson) {
  auto d = parse_csv("x,y\n1.0,1\n2.0,3\n3.0,2\n4.0,4");
  CompiledVisSpec s;
  s.mark = Mark::scatter;
  s.x = Encoding{"x"};
  s.y = Encoding{"y"};
  ScoreContext ctx{ScoreKind::correlation};
  EXPECT_NEAR(*interestingness(s, d, ctx), 0.8, 1e-12);
}

TEST(SpecDoc, BarDocument) {
  auto d = parse_csv("Dept,Sal\nA,10.0\nA,20.0\nB,30.0");
  Vis v;
  v.spec = compile_one(d, "Sal,Dept");
  v.data = process_vis(v.spec, d);
  auto doc = to_spec_doc(v);
  EXPECT_EQ(doc["mark"]["type"], "bar");
  EXPECT_EQ(doc["encoding"]["x"]["field"], "Dept");
  EXPECT_EQ(doc["encoding"]["x"]["type"], "nominal");
  EXPECT_EQ(doc["encoding"]["y"]["field"], "Sal");
  EXPECT_EQ(doc["encoding"]["y"]["aggregate"], "mean");
  EXPECT_EQ(doc["data"]["values"].size(), 2u);
}

TEST(SpecDoc, HistogramDocument) {
  std::string text = "v\n";
  for (int i = 0; i < 100; ++i) text += std::to_string(i) + "\n";
  auto d = parse_csv(text);
  Vis v;
  v.spec = compile_one(d, "v");
  v.data = process_vis(v.spec, d);
  auto doc = to_spec_doc(v);
  EXPECT_EQ(doc["mark"]["type"], "bar");
  ASSERT_EQ(doc["data"]["values"].size(), 10u);
  EXPECT_EQ(doc["encoding"]["y"]["field"], kCountField);
  EXPECT_EQ(doc["encoding"]["x2"]["field"], "v_end");
  double total = 0;
  for (const auto& row : doc["data"]["values"]) total += row[kCountField].get<double>();
  EXPECT_EQ(total, 100.0);
}

TEST(SpecDoc, SerializationIsDeterministic) {
  Gen g(31);
  for (int iter = 0; iter < 30; ++iter) {
    auto d = random_frame_data(g, FrameShape{.max_rows = 200, .max_cols = 5, .min_rows = 5});
    auto meta = compute_metadata(d);
    auto names = d.column_names();
    auto specs = compile_intent(parse_intent_list(g.pick(names)), meta);
    for (const auto& s : specs) {
      Vis v;
      v.spec = s;
      v.data = process_vis(s, d);
      v.score = 0.25;
      auto a = spec_doc_string(v);
      EXPECT_EQ(a, spec_doc_string(v));
      EXPECT_EQ(a, to_spec_doc(v).dump());
      EXPECT_FALSE(nlohmann::json::parse(a).is_discarded());
    }
  }
}

TEST(Cost, MarkOrdering) {
  auto hm = histogram("v", 10, 0, 1);
  auto heat = hm;
  heat.mark = Mark::heatmap;
  auto color_heat = hm;
  color_heat.mark = Mark::color_heatmap;
  EXPECT_GT(estimate_vis_cost(color_heat, 1000), estimate_vis_cost(heat, 1000));
  EXPECT_GT(estimate_vis_cost(heat, 1000), estimate_vis_cost(hm, 1000));
}

TEST(Cost, ZeroRowsAndLinearity) {
  auto s = histogram("v", 10, 0, 1);
  s.filters.push_back(Comparison{"v", FilterOp::gt, "0"});
  EXPECT_EQ(estimate_vis_cost(s, 0), 0.0);
  for (std::size_t n : {1, 7, 1000, 123456}) EXPECT_DOUBLE_EQ(estimate_vis_cost(s, 2 * n), 2 * estimate_vis_cost(s, n));
}
