#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "riskvi/benchmark.hpp"
#include "riskvi/penalty.hpp"
#include "riskvi/random_field.hpp"
#include "riskvi/risk.hpp"

namespace riskvi {

struct ControlGradient {
  FemFunction dz;
  double ds = 0.0;
};

struct GradientOptions {
  double newton_rel_tol = 1e-8;
  double adjoint_rel_tol = 1e-10;
  /// 0 means: RISKVI_WORKERS if set, else the hardware concurrency.
  std::size_t workers = 0;
};

/// Worker count for sample fan-out after applying the rule above.
std::size_t resolve_workers(std::size_t requested);

/// Solves (K + penalty Jacobian at y) p = scale M (y - y_d), p = 0 on the boundary.
FemFunction solve_adjoint(const BenchmarkInstance& instance, const FemFunction& y,
                          const PenaltyParams& params, double scale,
                          double rel_tol = 1e-10);

/// One state and one adjoint solve for a single sample.
struct SampleEvaluation {
  FemFunction y;
  FemFunction p;
  double misfit = 0.0;  ///< 1/2 ||y - y_d||^2
  double scale = 0.0;   ///< v_eps'(misfit - s)
  ControlGradient gradient;
};

/// `warm` (optional) holds the previous state of this sample; it is used as
/// the Newton initial guess and overwritten with the new state.
SampleEvaluation evaluate_sample(const BenchmarkInstance& instance, const Control& control,
                                 std::span<const double> xi, const PenaltyParams& params,
                                 const GradientOptions& options = {},
                                 std::vector<double>* warm = nullptr);

ControlGradient stochastic_gradient(const BenchmarkInstance& instance, const Control& control,
                                    std::span<const double> xi, const PenaltyParams& params,
                                    const GradientOptions& options = {});

/// Single-sample objective s + v_eps(misfit - s) + 1/2 ||z||^2.
double sample_objective(const BenchmarkInstance& instance, const Control& control,
                        std::span<const double> xi, const PenaltyParams& params,
                        const GradientOptions& options = {});

/// Per-sample Newton initial guesses, indexed by sample.
struct WarmStarts {
  std::vector<std::vector<double>> states;
};

struct FullGradient {
  ControlGradient mean;
  double objective = 0.0;
  std::vector<double> misfits;
  FemFunction mean_y;
  FemFunction mean_p;
  FemFunction mean_zeta;
  /// Filled only when requested; the SVRG reference gradients.
  std::vector<ControlGradient> per_sample;
  long pde_solves = 0;
};

/// Mean of the per-sample gradients. Samples are solved concurrently and
/// reduced in index order, so the result does not depend on the worker count.
FullGradient full_gradient(const BenchmarkInstance& instance, const Control& control,
                           const SampleSet& samples, const PenaltyParams& params,
                           const GradientOptions& options = {}, WarmStarts* warm = nullptr,
                           bool keep_per_sample = false);

/// ||mean p + z|| + |1 - v_eps'(1/2 ||mean y - y_d||^2 - s)|. The scalar
/// term uses the misfit of the mean state.
double residual(const BenchmarkInstance& instance, const Control& control,
                const FullGradient& full);
double residual(const BenchmarkInstance& instance, const Control& control,
                const SampleSet& samples, const PenaltyParams& params,
                const GradientOptions& options = {});

/// ||mean p + z|| + |1 - mean v_eps'(misfit_i - s)|: the norm of the full
/// gradient itself. Vanishes at every stationary point of the sample problem,
/// which the form above need not do when the misfits are spread out.
double gradient_residual(const BenchmarkInstance& instance, const FullGradient& full);

/// Sample averages of the discrete stationarity pairings. zeta and lambda are
/// dual vectors (lumped-mass weighted zeta, M(y - y_d) - K p); pairings skip
/// Dirichlet nodes. Norms are root mean squares over samples of lumped L2
/// norms, with dual vectors measured through the inverse lumped mass.
struct StationarityReport {
  double tau = 0.0;
  FemFunction zeta;    ///< mean nodal multiplier
  FemFunction lambda;  ///< mean lambda, as a nodal function
  double comp_state = 0.0;
  double comp_multiplier = 0.0;
  double pairing_zeta_p = 0.0;
  double pairing_zeta_p_weighted = 0.0;
  double sign_lambda_p = 0.0;
  double constraint_violation = 0.0;
  double zeta_norm = 0.0;
  double y_norm = 0.0;
  double lambda_norm = 0.0;
  double p_norm = 0.0;

  static std::string csv_header();
  std::string csv_row() const;
};

StationarityReport stationarity_report(const BenchmarkInstance& instance, const Control& control,
                                       const SampleSet& samples, const PenaltyParams& params,
                                       const GradientOptions& options = {},
                                       WarmStarts* warm = nullptr);

}  // namespace riskvi
