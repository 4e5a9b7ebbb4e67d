#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "luxen/engine.hpp"
#include "luxen/synthetic.hpp"

namespace luxen {

enum class OptLevel { no_opt, wflow, wflow_prune, all_opt };
std::string_view to_string(OptLevel level) noexcept;
std::optional<OptLevel> parse_opt_level(std::string_view text) noexcept;
inline constexpr OptLevel kAllOptLevels[] = {OptLevel::no_opt, OptLevel::wflow, OptLevel::wflow_prune,
                                             OptLevel::all_opt};

/// Switches on the mechanisms of `level`; everything else comes from `base`.
OptimizerConfig config_for(OptLevel level, OptimizerConfig base = {});
/// An engine configured for `level`. Without prune every candidate is processed.
std::unique_ptr<Engine> make_engine(OptLevel level, OptimizerConfig base = {});

enum class CellKind { print_frame, print_series, transform, set_intent };
std::string_view to_string(CellKind kind) noexcept;
/// "frame", "series" or "none": the label a cell is reported under.
std::string_view cell_label(CellKind kind) noexcept;

/// One notebook cell. Frames live in named variables.
struct WorkCell {
  CellKind kind = CellKind::print_frame;
  std::string target;         // variable printed, assigned or modified
  std::string source;         // transform input (equals target for inplace ops)
  nlohmann::json transform;   // transform descriptor
  std::string column;         // print_series
  std::optional<IntentSpec> intent;
  std::string note;
};

/// 36 cells over the frame in variable "df": 14 frame prints, 7 series
/// prints and 15 non-print cells, covering each expiry trigger once.
std::vector<WorkCell> default_workload(const SyntheticLayout& layout);

struct CellResult {
  std::size_t index = 0;
  CellKind kind = CellKind::print_frame;
  std::string note;
  double seconds = 0;
  double first_result_seconds = 0;  // first streamed recommendation; equals seconds when none
  std::uint64_t dashboard_computations = 0;
  std::uint64_t metadata_computations = 0;
  std::uint64_t scoring_operations = 0;
};

struct CellSummary {
  std::string label;
  std::size_t count = 0;
  double mean = 0;
  double median = 0;
  double mean_first_result = 0;
  std::uint64_t dashboard_computations = 0;
  std::uint64_t metadata_computations = 0;
  std::uint64_t scoring_operations = 0;
};

struct RecallResult {
  std::string action;
  std::size_t k = 0;
  std::size_t candidates = 0;
  double recall = 1.0;
  bool pruned = false;
  std::uint64_t max_sample_rows = 0;
};

struct RunReport {
  OptLevel level = OptLevel::no_opt;
  std::size_t repetition = 0;
  std::vector<CellResult> cells;
  double mean_cell_seconds() const;
  /// Per label, plus "all".
  std::vector<CellSummary> summaries() const;
};

struct BenchConfig {
  SyntheticConfig data;
  std::vector<OptLevel> levels{std::begin(kAllOptLevels), std::end(kAllOptLevels)};
  std::size_t repetitions = 1;
  std::vector<WorkCell> workload;  // empty: default_workload
  OptimizerConfig optimizer;       // sample cap, k, margin, parallelism
  bool recall = true;              // Recall@k for prune levels
  bool run_workload = true;

  void validate() const;
};

struct BenchReport {
  BenchConfig config;
  std::vector<RunReport> runs;
  std::vector<RecallResult> recall;

  nlohmann::ordered_json to_json() const;
  std::string to_table() const;
  /// Mean cell time of `level` averaged over repetitions.
  double mean_cell_seconds(OptLevel level) const;
};

/// Replays `workload` on a fresh copy of `data` under `level`.
RunReport run_workload(const FrameData& data, const std::vector<WorkCell>& workload, OptLevel level,
                       const OptimizerConfig& base = {});

BenchReport run_benchmark(const BenchConfig& config);

/// Recall@k of the pruned ranking of `action` against the exact ranking.
RecallResult measure_recall(const std::shared_ptr<Frame>& frame, std::string_view action,
                            const OptimizerConfig& config);

/// Wall time of one print of `frame` under `level` with metadata warm. For
/// all-opt this is the latency of the first streamed recommendation. The median
/// over `repetitions` fresh frames is returned.
double time_single_print(const FrameData& data, OptLevel level, const OptimizerConfig& base = {},
                         std::size_t repetitions = 1);

struct PowerFit {
  double a = 0;
  double b = 0;
  double c = 0;
  double sse = 0;
};
/// Least-squares fit of y = a + b·x^c: grid over c, closed form for a and b.
PowerFit fit_power(const std::vector<double>& x, const std::vector<double>& y, double c_min = 0.05,
                   double c_max = 4.0, double c_step = 0.001);

}  // namespace luxen
