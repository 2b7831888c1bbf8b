#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "riskvi/benchmark.hpp"
#include "riskvi/fem.hpp"

namespace riskvi {

/// Penalty weight 1/tau with smoothing width tau^smoothing_exponent.
struct PenaltyParams {
  double tau = 0.1;
  double smoothing_exponent = 1.1;

  double smoothing_width() const;
  void validate() const;
};

/// C^1 smoothing of max(0, r) with width tau_s.
double m_tau(double r, double tau_s);
double m_tau_prime(double r, double tau_s);

struct NewtonOptions {
  /// Converged once ||R(y)|| <= rel_tol * ||R(0)||.
  double rel_tol = 1e-8;
  int max_iterations = 50;
  double min_step = 0x1.0p-20;
};

/// Newton failure; carries the residual norms seen so far.
class NewtonError : public std::runtime_error {
 public:
  NewtonError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const std::vector<double>& residual_history() const { return history_; }

 private:
  std::vector<double> history_;
};

struct PenalizedSolution {
  std::vector<double> y;
  int newton_iterations = 0;
  int linear_iterations = 0;
  /// ||R(0)||, the residual of the zero state; the reference for rel_tol.
  double initial_residual = 0.0;
  double final_residual = 0.0;
  std::vector<double> residual_history;
};

/// Solves K y - (1/tau) L m_{tau_s}(-y) = load with y = 0 on the boundary,
/// L the lumped mass. This enforces y >= 0 approximately. Damped Newton,
/// halving the step until the residual norm decreases.
/// `initial_guess` (optional) is a warm start; its boundary values are ignored.
PenalizedSolution solve_penalized(const FemSystem& system, std::span<const double> load,
                                  const PenaltyParams& params, const NewtonOptions& options,
                                  std::span<const double> initial_guess = {});

/// (1/tau) L m_tau'(-y) on interior nodes, zero on boundary nodes: the
/// diagonal that the penalty adds to the state Jacobian.
std::vector<double> penalty_jacobian_diagonal(const FemSystem& system,
                                              std::span<const double> y,
                                              const PenaltyParams& params);

/// Nodal multiplier (1/tau) m_{tau_s}(-y) >= 0.
std::vector<double> penalty_multiplier(std::span<const double> y, const PenaltyParams& params);

/// M (f + z): the consistent load of a nodal source.
std::vector<double> load_vector(const FemSystem& system, std::span<const double> source);

struct StateSolve {
  FemFunction y;
  int newton_iterations = 0;
  double initial_residual = 0.0;
  double final_residual = 0.0;
  std::vector<double> residual_history;
  FemFunction multiplier;
};

StateSolve solve_state(const BenchmarkInstance& instance, const FemFunction& z,
                       std::span<const double> xi, const PenaltyParams& params,
                       double newton_rel_tol = 1e-8,
                       std::span<const double> initial_guess = {});

struct ObstacleSolution {
  std::vector<double> y;
  /// K y - load on interior nodes (a dual vector), zero on the boundary.
  std::vector<double> multiplier;
  long sweeps = 0;
  double residual = 0.0;
};

/// Projected Gauss-Seidel (omega = 1) or projected SOR for
/// K y - zeta = load, y >= 0, zeta >= 0, zeta^T y = 0, with y = 0 on the
/// boundary. Stops once max_i |min(y_i, (K y - load)_i)| <= tol.
ObstacleSolution solve_obstacle_pgs(const FemSystem& system, std::span<const double> load,
                                    double tol = 1e-10, long max_sweeps = 1000000,
                                    double omega = 1.0,
                                    std::span<const double> initial_guess = {});

FemFunction solve_obstacle_reference(const BenchmarkInstance& instance, const FemFunction& z,
                                     std::span<const double> xi);

struct ComplementarityResiduals {
  double violation;  ///< ||min(y, 0)||_{L2}
  double pairing;    ///< |zeta^T M y|
};

ComplementarityResiduals complementarity_residuals(const FemFunction& y,
                                                   const FemFunction& zeta,
                                                   const SparseMatrix& mass);

}  // namespace riskvi
