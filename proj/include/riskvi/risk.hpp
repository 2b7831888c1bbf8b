#pragma once

#include <span>

#include "riskvi/fem.hpp"

namespace riskvi {

struct RiskParams {
  double beta = 0.0;
  double epsilon = 0.05;

  /// Throws std::invalid_argument unless 0 <= beta < 1 and epsilon > 0.
  void validate() const;
  /// Start of the linear branch, epsilon * beta / (1 - beta).
  double upper_breakpoint() const { return epsilon * beta / (1.0 - beta); }
};

/// C^1 piecewise-quadratic surrogate of max(s, 0) / (1 - beta).
double v_eps(double s, const RiskParams& params);
double v_eps_prime(double s, const RiskParams& params);

/// Control u = (z, s): distributed control and the CVaR auxiliary scalar.
struct Control {
  FemFunction z;
  double s = 0.0;
};

/// s + (1/n) sum v_eps(misfit_i - s) + control_cost.
double saa_objective(double s, double control_cost, std::span<const double> misfits,
                     const RiskParams& params);
/// Same, with control_cost = 1/2 ||z||^2 in L2.
double saa_objective(const Control& control, std::span<const double> misfits,
                     const RiskParams& params, const SparseMatrix& mass);

/// Empirical CVaR_beta: min over s of s + E[max(X - s, 0)] / (1 - beta),
/// attained at a data point.
double cvar_exact(std::span<const double> values, double beta);

struct SmoothedRisk {
  double value;
  double s;
};
/// min over s of s + (1/n) sum v_eps(x_i - s); the objective is convex in s
/// and its derivative 1 - mean v_eps' is monotone, so bisection on it.
SmoothedRisk smoothed_risk_min(std::span<const double> values, const RiskParams& params);

}  // namespace riskvi
