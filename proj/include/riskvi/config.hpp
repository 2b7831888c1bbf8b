#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "riskvi/random_field.hpp"
#include "riskvi/risk.hpp"
#include "riskvi/svrg.hpp"

namespace riskvi {

enum class RunMode { Optimize, StationarityOnly, FieldPreview };

std::string to_string(RunMode mode);
RunMode parse_run_mode(std::string_view text);

/// Everything a run needs. Resolved in layers: defaults, then a flat
/// key=value file, then command-line overrides.
struct RunConfig {
  NoiseModel noise = NoiseModel::MeanZero;
  RiskParams risk;
  int nx = 32;
  int ny = 32;
  int order = 1;
  SvrgConfig svrg;
  std::string output = "riskvi-out";
  RunMode mode = RunMode::Optimize;
  /// Directory of a finished optimize run (stationarity_only mode).
  std::string from;

  /// Assigns one key; throws std::invalid_argument for unknown keys or
  /// unparsable values.
  void set(std::string_view key, std::string_view value);
  /// Range checks of every owning module.
  void validate() const;
  /// Resolved config as key=value lines, readable by parse_config_text.
  std::string to_text() const;

  static const std::vector<std::string>& keys();
};

/// Applies `key=value` lines onto `base`. Blank lines and lines starting
/// with '#' are skipped.
RunConfig parse_config_text(std::string_view text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

}  // namespace riskvi
