#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "luxen/clause.hpp"
#include "luxen/column.hpp"
#include "luxen/metadata.hpp"
#include "luxen/transform.hpp"

namespace luxen {

struct HistoryEvent {
  HistoryKind kind = HistoryKind::load;
  nlohmann::json params;
  std::uint64_t seq = 0;
};

/// Immutable contents of one frame version. Readers hold a shared snapshot;
/// writers replace the whole pointer.
struct FrameData {
  std::vector<std::shared_ptr<const Column>> columns;
  std::vector<std::shared_ptr<const Column>> index;  // empty: positional row labels
  std::size_t rows = 0;
  std::uint64_t version = 1;
  bool pre_aggregated = false;
  std::optional<IntentSpec> intent;
  std::uint64_t intent_version = 0;
  std::uint64_t override_epoch = 0;
  std::vector<HistoryEvent> history;
  std::map<std::string, SemanticType> overrides;

  std::optional<std::size_t> column_index(std::string_view name) const noexcept;
  const Column& column(std::string_view name) const;
  std::vector<std::string> column_names() const;
  std::string row_label(std::size_t row) const;
  std::string index_name() const;

  /// Digest of labels and cell contents (not version or caches).
  std::uint64_t content_hash() const;
};

enum class ExpiryTrigger { inplace_modify, column_update, label_change, intent_change };

struct Dashboard;    // recommender.hpp
struct SampleCache;  // optimizer.hpp

/// Key under which a dashboard is memoized.
struct RecStamp {
  std::uint64_t version = 0;
  std::uint64_t intent_version = 0;
  std::uint64_t override_epoch = 0;
  std::size_t k = 0;
  bool operator==(const RecStamp&) const = default;
};

/// A versioned frame plus its lazily-filled metadata, recommendation and
/// sample caches. Mutations are expected to be serialized by the caller;
/// snapshot() and the cache accessors are safe from any thread.
class Frame : public std::enable_shared_from_this<Frame> {
 public:
  explicit Frame(FrameData data, std::weak_ptr<Frame> parent = {});
  static std::shared_ptr<Frame> create(FrameData data, std::weak_ptr<Frame> parent = {});

  std::shared_ptr<const FrameData> snapshot() const;
  std::uint64_t version() const { return snapshot()->version; }
  std::uint64_t intent_version() const { return snapshot()->intent_version; }
  std::size_t rows() const { return snapshot()->rows; }
  std::shared_ptr<Frame> parent() const { return parent_.lock(); }

  void apply_inplace(const Transform& op);
  void set_intent(std::optional<IntentSpec> intent);
  void set_type_override(const std::string& column, SemanticType type);
  /// O(1): drops the caches a trigger invalidates. Never recomputes.
  void expire(ExpiryTrigger trigger);

  /// Metadata for the current version, computed on first use and memoized.
  std::shared_ptr<const MetadataSet> metadata();
  std::shared_ptr<const MetadataSet> metadata_for(const std::shared_ptr<const FrameData>& snap);
  bool metadata_valid() const;

  RecStamp rec_stamp(std::size_t k) const;
  static RecStamp rec_stamp(const FrameData& data, std::size_t k);
  std::shared_ptr<const Dashboard> cached_dashboard(const RecStamp& stamp) const;
  /// Stores only if `stamp` still matches the current version.
  void store_dashboard(const RecStamp& stamp, std::shared_ptr<const Dashboard> dashboard);
  bool recommendations_valid(std::size_t k) const;

  std::shared_ptr<const SampleCache> cached_sample(std::uint64_t version, std::size_t cap, std::uint64_t seed) const;
  void store_sample(std::shared_ptr<const SampleCache> sample);
  bool sample_valid() const;

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const FrameData> data_;
  std::weak_ptr<Frame> parent_;

  std::shared_ptr<const MetadataSet> metadata_;
  std::shared_ptr<const Dashboard> dashboard_;
  RecStamp dashboard_stamp_;
  std::shared_ptr<const SampleCache> sample_;

  void replace_data(std::shared_ptr<const FrameData> next);
};

/// Applies `op` to the frame's current data and returns the result. A derived
/// frame links back to `frame` as its parent; inplace ops return `frame`.
std::shared_ptr<Frame> apply_transform(const std::shared_ptr<Frame>& frame, const Transform& op);

/// Pure transform of frame contents (history, version and flags included).
FrameData transform_data(const FrameData& data, const Transform& op);

/// Metadata with semantic types inferred and overrides applied.
MetadataSet compute_metadata(const FrameData& data);

/// Rows (ascending) satisfying every comparison; `within` restricts the scan.
std::vector<std::uint32_t> matching_rows(const FrameData& data, std::span<const Comparison> predicate,
                                         const std::vector<std::uint32_t>* within = nullptr);

}  // namespace luxen
