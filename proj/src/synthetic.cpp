#include "luxen/synthetic.hpp"

#include <cmath>
#include <random>

namespace luxen {

void SyntheticConfig::validate() const {
  if (rows == 0 || cols == 0) throw InvalidArgument("synthetic frame needs at least one row and one column");
  if (quantitative < 0 || nominal < 0 || temporal < 0) throw InvalidArgument("type fractions must be non-negative");
  double total = quantitative + nominal + temporal;
  if (std::abs(total - 1.0) > 1e-6) throw InvalidArgument("type fractions must sum to 1");
  if (factor_group == 0) throw InvalidArgument("factor_group must be positive");
}

SyntheticLayout synthetic_layout(const SyntheticConfig& c) {
  SyntheticLayout l;
  double total = c.quantitative + c.nominal + c.temporal;
  auto share = [&](double f) { return static_cast<std::size_t>(std::llround(static_cast<double>(c.cols) * f / total)); };
  l.quantitative = std::min(c.cols, share(c.quantitative));
  l.temporal = std::min(c.cols - l.quantitative, share(c.temporal));
  l.nominal = c.cols - l.quantitative - l.temporal;
  return l;
}

std::size_t synthetic_cardinality(std::size_t j, std::size_t count) {
  if (count <= 1) return 1;
  double e = 4.0 * static_cast<double>(j) / static_cast<double>(count - 1);
  return static_cast<std::size_t>(std::llround(std::pow(10.0, e)));
}

namespace {

// s such that z + s(z^2 - 1), z standard normal, has the given skewness.
double shape_for_skewness(double target) {
  double lo = 0, hi = 1;
  for (int it = 0; it < 60; ++it) {
    double s = 0.5 * (lo + hi);
    double g = (6 * s + 8 * s * s * s) / std::pow(1 + 2 * s * s, 1.5);
    (g < target ? lo : hi) = s;
  }
  return lo;
}

}  // namespace

FrameData make_synthetic(const SyntheticConfig& config) {
  config.validate();
  auto layout = synthetic_layout(config);
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  const std::size_t n = config.rows;

  FrameData data;
  data.rows = n;

  std::size_t factors = (layout.quantitative + config.factor_group - 1) / config.factor_group;
  std::vector<std::vector<double>> latent(factors, std::vector<double>(n));
  for (auto& f : latent)
    for (auto& v : f) v = normal(rng);

  for (std::size_t i = 0; i < layout.quantitative; ++i) {
    const auto& f = latent[i / config.factor_group];
    double loading = 0.95 * unit(rng);
    double noise = std::sqrt(1.0 - loading * loading);
    double skew = shape_for_skewness(2.5 * unit(rng));
    double scale = std::pow(10.0, 1.0 + 3.0 * unit(rng));
    double shift = scale * (unit(rng) * 4.0 - 2.0);
    std::vector<double> values(n);
    for (std::size_t r = 0; r < n; ++r) {
      double z = loading * f[r] + noise * normal(rng);
      values[r] = shift + scale * (z + skew * (z * z - 1.0));
    }
    std::string name = "q" + std::to_string(i);
    if (i % 2 == 0) {
      std::vector<std::int64_t> ints(n);
      for (std::size_t r = 0; r < n; ++r) ints[r] = std::llround(values[r]);
      data.columns.push_back(std::make_shared<const Column>(Column::integers(name, std::move(ints))));
    } else {
      data.columns.push_back(std::make_shared<const Column>(Column::floats(name, std::move(values))));
    }
  }

  for (std::size_t j = 0; j < layout.nominal; ++j) {
    std::size_t card = synthetic_cardinality(j, layout.nominal);
    std::uniform_int_distribution<std::size_t> pick(0, card - 1);
    std::vector<std::string> values(n);
    for (auto& v : values) v = "v" + std::to_string(pick(rng));
    data.columns.push_back(
        std::make_shared<const Column>(Column::strings("n" + std::to_string(j), std::move(values))));
  }

  // Days between 2000-01-01 and 2019-12-31.
  constexpr std::int64_t kStart = 946684800, kDay = 86400, kDays = 7305;
  std::uniform_int_distribution<std::int64_t> day(0, kDays - 1);
  for (std::size_t t = 0; t < layout.temporal; ++t) {
    std::vector<std::int64_t> secs(n);
    for (auto& s : secs) s = kStart + day(rng) * kDay;
    data.columns.push_back(
        std::make_shared<const Column>(Column::datetimes("t" + std::to_string(t), std::move(secs))));
  }

  data.history.push_back(HistoryEvent{HistoryKind::load,
                                      {{"rows", n}, {"columns", config.cols}, {"seed", config.seed}},
                                      0});
  return data;
}

std::shared_ptr<Frame> synthetic_frame(const SyntheticConfig& config) { return Frame::create(make_synthetic(config)); }

}  // namespace luxen
