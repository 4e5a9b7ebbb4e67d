#pragma once

#include <cstdint>
#include <memory>
#include <vector>

namespace luxen {

struct FrameData;

/// Uniform row sample (without replacement) of one frame version.
/// When the frame fits under the cap the sample is every row and `rows` is
/// left empty.
struct SampleCache {
  std::vector<std::uint32_t> rows;  // ascending
  bool all_rows = true;
  std::size_t total_rows = 0;
  std::size_t cap = 0;
  std::uint64_t seed = 0;
  std::uint64_t version = 0;
  /// The sampled rows as a frame of their own (set by materialize_sample).
  std::shared_ptr<const FrameData> data;

  std::size_t size() const noexcept { return all_rows ? total_rows : rows.size(); }
};

}  // namespace luxen
