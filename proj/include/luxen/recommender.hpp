#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "luxen/compiler.hpp"
#include "luxen/frame.hpp"
#include "luxen/optimizer.hpp"
#include "luxen/score.hpp"
#include "luxen/vis.hpp"

namespace luxen {

/// Frames below this many rows are too small for an overview of their own.
inline constexpr std::size_t kSmallFrameRows = 5;
/// Filter-action candidate columns have at most this many distinct values.
inline constexpr std::size_t kFilterCardinality = 40;

/// Built-in action names.
namespace actions {
inline constexpr const char* kCurrent = "Current";
inline constexpr const char* kEnhance = "Enhance";
inline constexpr const char* kFilter = "Filter";
inline constexpr const char* kCorrelation = "Correlation";
inline constexpr const char* kDistribution = "Distribution";
inline constexpr const char* kOccurrence = "Occurrence";
inline constexpr const char* kTemporal = "Temporal";
inline constexpr const char* kGeographic = "Geographic";
inline constexpr const char* kIndex = "Index";
inline constexpr const char* kSeries = "Series";
inline constexpr const char* kUnfiltered = "Unfiltered";
}  // namespace actions

/// The intent's compiled base visualization, when it is a single spec.
struct IntentBase {
  PartialVisSpec partial;
  CompiledVisSpec spec;
};

/// Read-only inputs shared by every action of one dashboard.
struct ActionContext {
  std::shared_ptr<const FrameData> data;
  std::shared_ptr<const MetadataSet> meta;
  std::optional<IntentBase> base;
  std::vector<CompiledVisSpec> intent_specs;  // compiled intent (any count)
  const OptimizerConfig* config = nullptr;
  EncodingOptions encoding;

  const FrameData& frame() const { return *data; }
  const MetadataSet& metadata() const { return *meta; }
  std::size_t rows() const { return data->rows; }
};

/// One search-space member. Custom actions may supply a score directly.
struct Candidate {
  CompiledVisSpec spec;
  std::optional<double> score;
  bool scored = false;
  double rank_hint = 0;
  std::string added;  // Enhance: the added attribute
};

enum class Dispatch { intent, structure, series, history, overview };
std::string_view to_string(Dispatch d) noexcept;

/// Custom actions are ordered after every built-in, by registration.
inline constexpr int kCustomDisplayOrder = 1000;

struct Action {
  std::string name;
  ScoreKind kind = ScoreKind::none;
  /// Whether approximate two-pass ranking may be used for this action.
  bool prunable = false;
  /// Dispatch paths the action runs on; empty means every path.
  std::vector<Dispatch> paths;
  std::function<bool(const ActionContext&)> trigger;
  std::function<std::vector<Candidate>(const ActionContext&, std::vector<std::string>& diagnostics)> generate;
  /// Optional cost estimate; when set, generation is deferred until the action runs.
  std::function<double(const ActionContext&)> estimate;
  /// Optional override of the kind-based scorer.
  std::function<std::optional<double>(const Candidate&, const ActionContext&, const std::vector<std::uint32_t>*)> score;
  int display_order = kCustomDisplayOrder;  // built-ins use their canonical ordinal
};

struct Recommendation {
  std::string action;
  std::vector<Vis> vises;
  bool truncated = false;
  double estimated_cost = 0;
  std::size_t position = 0;  // start position in the cost-ordered schedule
  std::vector<std::string> diagnostics;
  int display_order = 0;
};

struct Dashboard {
  std::uint64_t frame_version = 0;
  std::uint64_t intent_version = 0;
  std::size_t k = kDefaultTopK;
  std::optional<Vis> current;
  std::vector<Recommendation> recommendations;  // display order
  std::vector<std::string> diagnostics;
  std::vector<std::string> warnings;  // intent validation

  const Recommendation* find(std::string_view action) const noexcept;
  /// "Action-rank" with 1-based rank.
  const Vis* find_vis(std::string_view id) const;
};

std::string vis_id(std::string_view action, std::size_t rank);

/// Action registry. Registration is serialized; readers take snapshots.
class Registry {
 public:
  /// A registry holding the default actions.
  Registry();
  static Registry empty();

  void register_action(Action action);
  /// Swaps in a new definition for an existing action, keeping its slot.
  void replace_action(Action action);
  std::shared_ptr<const std::vector<Action>> snapshot() const;
  bool contains(std::string_view name) const;

 private:
  struct EmptyTag {};
  explicit Registry(EmptyTag) {}
  mutable std::mutex mu_;
  std::shared_ptr<const std::vector<Action>> actions_ = std::make_shared<const std::vector<Action>>();
};

/// The default action set in display order.
std::vector<Action> default_actions();

/// Called with each completed recommendation (from a worker thread in async mode).
using RecommendationSink = std::function<void(const Recommendation&)>;
/// Called once with the cost-ordered start schedule before any action runs.
using ScheduleSink = std::function<void(const std::vector<ScheduleEntry>&)>;

struct GenerateOptions {
  OptimizerConfig config;
  EncodingOptions encoding;
  ThreadPool* pool = nullptr;  // async mode runs actions here
  RecommendationSink on_recommendation;
  ScheduleSink on_schedule;
  /// Process every candidate's data before ranking (the unoptimized path).
  bool eager_processing = false;
};

/// Builds the dashboard for the frame's current snapshot. Never mutates the
/// frame's data or version; may fill the frame's metadata and sample caches
/// when wflow is on.
Dashboard generate_dashboard(Frame& frame, const Registry& registry, const GenerateOptions& options);
/// Same, for a specific snapshot of the frame.
Dashboard generate_dashboard(Frame& frame, std::shared_ptr<const FrameData> snapshot, const Registry& registry,
                             const GenerateOptions& options);

/// Runs one action to completion (candidates, ranking, top-k data).
Recommendation run_action(const Action& action, const ActionContext& ctx, Frame& frame, const GenerateOptions& options);

/// Which dispatch path applies to a frame snapshot.
Dispatch dispatch_path(const FrameData& data, bool has_intent);

/// Compiles the frame's intent; fills `base` when it yields exactly one spec.
std::vector<CompiledVisSpec> compile_frame_intent(const FrameData& data, const MetadataSet& meta,
                                                  std::optional<IntentBase>& base,
                                                  std::vector<std::string>& diagnostics,
                                                  const EncodingOptions& encoding = {});

}  // namespace luxen
