#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "riskvi/gradient.hpp"

namespace riskvi {

/// Which residual ends the middle loop.
enum class StopRule {
  Gradient,  ///< gradient_residual
  Printed,   ///< residual (mean-state misfit in the scalar term)
};

std::string to_string(StopRule rule);
StopRule parse_stop_rule(std::string_view text);

struct SvrgConfig {
  double tau_initial = 0.1;
  double gamma = 0.1;
  double tau_final = 1e-6;
  /// Epoch lengths are uniform on {1, ..., update_frequency}.
  long update_frequency = 1000;
  /// Middle-loop tolerance; 0 selects 5e-4 h^2.
  double tol = 0.0;
  std::uint64_t seed = 1;
  std::size_t n = 500;
  long max_epochs = 200;
  /// Epoch lengths drawn up front; raised to cover the worst case if smaller.
  long predrawn_lengths = 5000;
  double z_initial = 1.0;
  double s_initial = 1.0;
  /// Abort instead of advancing when the epoch cap is hit.
  bool strict = false;
  StopRule stop_rule = StopRule::Gradient;
  GradientOptions gradient;

  void validate() const;
  /// tau_initial, gamma tau_initial, ... down to tau_final.
  std::vector<double> tau_ladder() const;
  double resolved_tol(const Mesh& mesh) const;
};

/// t_kl = sqrt(theta / (k l + nu)) with theta = 1/(2 nu) + 1 and
/// nu = 2 theta / (2 nu - 1) - 1 holding together.
struct StepRule {
  double theta;
  double nu;
};

/// Eliminating theta leaves 2 nu^3 + nu^2 - 3 nu - 1 = 0; its root in [1, 2]
/// by bisection.
StepRule step_constants();
double step_size(const StepRule& rule, long k, long l);

struct EpochResult {
  Control control;
  long inner_steps = 0;
  long pde_solves = 0;
  /// max |G(u_1, w_i) recomputed - stored| at the first inner step; 0 when
  /// the variance-reduced direction reduces to the full gradient exactly.
  double first_step_mismatch = 0.0;
};

/// One variance-reduced epoch from u_1 = u_tilde. `reference` must be the
/// full gradient at u_tilde with per-sample gradients kept. `indices` are
/// 0-based sample indices, one per inner step.
EpochResult svrg_epoch(const BenchmarkInstance& instance, const Control& u_tilde,
                       const FullGradient& reference, const SampleSet& samples,
                       const PenaltyParams& params, const StepRule& rule, long k,
                       std::span<const std::size_t> indices, const GradientOptions& options = {},
                       WarmStarts* warm = nullptr);

/// One row per full-gradient evaluation in the middle loop.
struct HistoryRow {
  double tau = 0.0;
  long epoch = 0;  ///< epochs completed so far, over all tau
  double objective = 0.0;
  double residual = 0.0;  ///< the one selected by the stop rule
  double printed_residual = 0.0;
  double gradient_residual = 0.0;
  long n_k = 0;  ///< length of the epoch that follows; 0 when the loop exits
  long full_grad_count = 0;
  long pde_solves = 0;
  double wall_seconds = 0.0;
};

struct RunReport {
  SvrgConfig config;
  double tol = 0.0;
  SampleSet samples;
  std::vector<HistoryRow> history;
  /// Report at the accepted iterate of each tau.
  std::vector<StationarityReport> stationarity;
  std::vector<char> tau_converged;
  bool converged = true;
  Control control;
  FemFunction mean_y;
  FemFunction mean_zeta;
  double objective = 0.0;
  double residual = 0.0;
  long epochs = 0;
  long inner_steps = 0;
  long full_grad_count = 0;
  long pde_solves = 0;
  long report_pde_solves = 0;
  double first_step_mismatch = 0.0;
};

/// The sample set run_path_following draws for `config`.
SampleSet draw_run_samples(const BenchmarkInstance& instance, const SvrgConfig& config);

using HistoryCallback = std::function<void(const HistoryRow&)>;

RunReport run_path_following(const BenchmarkInstance& instance, const SvrgConfig& config,
                             const HistoryCallback& on_row = {});
/// Same with a caller-supplied sample set (config.n is ignored). The stream
/// still yields the epoch lengths first, then the index vectors.
RunReport run_path_following(const BenchmarkInstance& instance, const SvrgConfig& config,
                             const SampleSet& samples, const HistoryCallback& on_row = {});

/// Deterministic columns only; wall-clock time goes to timing_csv.
std::string history_csv(const RunReport& report);
std::string timing_csv(const RunReport& report);
std::string stationarity_csv(const RunReport& report);

}  // namespace riskvi
