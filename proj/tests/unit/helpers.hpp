#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "luxen/csv.hpp"
#include "luxen/frame.hpp"
#include "luxen/recommender.hpp"

namespace luxen::testing {

inline std::shared_ptr<Frame> csv_frame(std::string_view text) { return Frame::create(parse_csv(text)); }

/// Synchronous exact-ranking options, the reference configuration for content checks.
inline GenerateOptions sync_options(std::size_t k = kDefaultTopK) {
  GenerateOptions o;
  o.config.async = false;
  o.config.prune = false;
  o.config.k = k;
  return o;
}

inline Dashboard dashboard(Frame& f, std::size_t k = kDefaultTopK) {
  return generate_dashboard(f, Registry(), sync_options(k));
}

inline std::vector<std::string> action_names(const Dashboard& d) {
  std::vector<std::string> out;
  for (const auto& r : d.recommendations) out.push_back(r.action);
  return out;
}

}  // namespace luxen::testing
