#pragma once

#include <istream>
#include <memory>
#include <string>
#include <string_view>

#include "luxen/frame.hpp"

namespace luxen {

struct CsvOptions {
  char delimiter = ',';
  bool header = true;
};

/// Parses RFC-4180 style delimited text into frame data at version 1 with a
/// single `load` history event. Storage types are inferred per column in the
/// order integer, float, datetime, boolean, string. No metadata is computed.
FrameData parse_csv(std::string_view text, const CsvOptions& options = {});

std::shared_ptr<Frame> load_csv(std::istream& source, const CsvOptions& options = {});
std::shared_ptr<Frame> load_csv_file(const std::string& path, const CsvOptions& options = {});

/// Writes frame contents as CSV (header + rows; index omitted).
std::string to_csv(const FrameData& data, char delimiter = ',');

}  // namespace luxen
