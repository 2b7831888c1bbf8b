#pragma once

#include <ostream>
#include <string>

#include "riskvi/config.hpp"

namespace riskvi {

inline constexpr const char* kVersion = "0.1.0";

/// Executes the configured mode and writes its outputs under config.output.
/// Returns the process exit status; progress goes to `log`.
int run(const RunConfig& config, std::ostream& log);

/// Reads a field written by write_field_csv back onto `mesh`; the node
/// coordinates must match.
FemFunction read_field_csv(const std::string& path, const std::shared_ptr<const Mesh>& mesh);

}  // namespace riskvi
