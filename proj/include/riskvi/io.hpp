#pragma once

#include <string>

namespace riskvi {

/// Write `content` to `path` via a sibling temp file and rename, so readers
/// never see a truncated file.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

}  // namespace riskvi
