#pragma once

#include <string>

#include "json.hpp"
#include "luxen/vis.hpp"

namespace luxen {

/// Chart document in a Vega-Lite compatible subset with inline, pre-binned
/// and pre-aggregated data. Key order is fixed. See docs/spec-doc.md.
nlohmann::ordered_json to_spec_doc(const Vis& vis);

/// Compact serialization used by the CLI and the HTTP API.
std::string spec_doc_string(const Vis& vis);

/// The compiled spec alone (no data), for manifests and diagnostics.
nlohmann::ordered_json spec_summary(const CompiledVisSpec& spec);

}  // namespace luxen
