#include "riskvi/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace riskvi {

double PenaltyParams::smoothing_width() const { return std::pow(tau, smoothing_exponent); }

void PenaltyParams::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("penalty tau must be > 0");
  if (!(smoothing_exponent > 0.0)) {
    throw std::invalid_argument("penalty smoothing exponent must be > 0");
  }
}

double m_tau(double r, double tau_s) {
  if (r <= 0.0) return 0.0;
  if (r < tau_s) return r * r / (2.0 * tau_s);
  return r - 0.5 * tau_s;
}

double m_tau_prime(double r, double tau_s) {
  if (r <= 0.0) return 0.0;
  if (r < tau_s) return r / tau_s;
  return 1.0;
}

namespace {

// R(y) = K_D y - (1/tau) L m(-y) - load_D. Boundary rows reduce to y_i.
void penalized_residual(const FemSystem& sys, std::span<const double> y,
                        std::span<const double> load, double inv_tau, double tau_s,
                        std::span<double> out) {
  sys.dirichlet_stiffness.multiply(y, out);
  const auto& on_boundary = sys.mesh->on_boundary;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (on_boundary[i]) continue;
    out[i] -= inv_tau * sys.lumped_mass[i] * m_tau(-y[i], tau_s) + load[i];
  }
}

}  // namespace

std::vector<double> penalty_jacobian_diagonal(const FemSystem& sys, std::span<const double> y,
                                              const PenaltyParams& params) {
  const double inv_tau = 1.0 / params.tau;
  const double tau_s = params.smoothing_width();
  std::vector<double> d(y.size(), 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (sys.mesh->on_boundary[i]) continue;
    d[i] = inv_tau * sys.lumped_mass[i] * m_tau_prime(-y[i], tau_s);
  }
  return d;
}

std::vector<double> penalty_multiplier(std::span<const double> y, const PenaltyParams& params) {
  const double inv_tau = 1.0 / params.tau;
  const double tau_s = params.smoothing_width();
  std::vector<double> zeta(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) zeta[i] = inv_tau * m_tau(-y[i], tau_s);
  return zeta;
}

std::vector<double> load_vector(const FemSystem& sys, std::span<const double> source) {
  if (source.size() != sys.size()) throw std::invalid_argument("load_vector: size mismatch");
  return sys.mass * source;
}

PenalizedSolution solve_penalized(const FemSystem& sys, std::span<const double> load,
                                  const PenaltyParams& params, const NewtonOptions& options,
                                  std::span<const double> initial_guess) {
  params.validate();
  const std::size_t n = sys.size();
  if (load.size() != n) throw std::invalid_argument("solve_penalized: load size mismatch");
  if (!initial_guess.empty() && initial_guess.size() != n) {
    throw std::invalid_argument("solve_penalized: initial guess size mismatch");
  }
  const auto& on_boundary = sys.mesh->on_boundary;
  const double inv_tau = 1.0 / params.tau;
  const double tau_s = params.smoothing_width();

  PenalizedSolution out;
  double r0 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!on_boundary[i]) r0 += load[i] * load[i];
  }
  r0 = std::sqrt(r0);
  out.initial_residual = r0;
  out.y.assign(n, 0.0);
  if (r0 == 0.0) return out;
  if (!initial_guess.empty()) {
    for (std::size_t i = 0; i < n; ++i) out.y[i] = on_boundary[i] ? 0.0 : initial_guess[i];
  }
  const double target = options.rel_tol * r0;

  std::vector<double> res(n), trial(n), trial_res(n), step(n), rhs(n);
  penalized_residual(sys, out.y, load, inv_tau, tau_s, res);
  double rnorm = norm2(res);
  out.residual_history.push_back(rnorm);

  for (int it = 0;; ++it) {
    if (rnorm <= target) break;
    if (it == options.max_iterations) {
      throw NewtonError("Newton did not converge in " + std::to_string(it) +
                            " iterations (residual " + std::to_string(rnorm) + ", target " +
                            std::to_string(target) + ")",
                        out.residual_history);
    }
    auto jac = sys.dirichlet_stiffness.plus_diagonal(penalty_jacobian_diagonal(sys, out.y, params));
    for (std::size_t i = 0; i < n; ++i) rhs[i] = -res[i];
    // Loose linear solves far from the root, tight enough near it that the
    // linear error stays below the Newton target.
    const double eta = std::min(1e-2, std::max(0.5 * target / rnorm, rnorm / r0));
    std::fill(step.begin(), step.end(), 0.0);
    out.linear_iterations += solve_sparse(jac, rhs, step, eta).iterations;

    double alpha = 1.0;
    double trial_norm = 0.0;
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = out.y[i] + alpha * step[i];
      penalized_residual(sys, trial, load, inv_tau, tau_s, trial_res);
      trial_norm = norm2(trial_res);
      if (trial_norm < rnorm) break;
      alpha *= 0.5;
      if (alpha < options.min_step) {
        throw NewtonError("Newton damping reached the minimum step (residual " +
                              std::to_string(rnorm) + ", target " + std::to_string(target) +
                              ")",
                          out.residual_history);
      }
    }
    out.y.swap(trial);
    res.swap(trial_res);
    rnorm = trial_norm;
    out.residual_history.push_back(rnorm);
    ++out.newton_iterations;
  }
  out.final_residual = rnorm;
  return out;
}

StateSolve solve_state(const BenchmarkInstance& inst, const FemFunction& z,
                       std::span<const double> xi, const PenaltyParams& params,
                       double newton_rel_tol, std::span<const double> initial_guess) {
  if (z.size() != inst.system.size()) throw std::invalid_argument("solve_state: control size");
  const FemFunction f = build_rhs(inst, xi);
  std::vector<double> source(f.size());
  for (std::size_t i = 0; i < source.size(); ++i) source[i] = f[i] + z[i];
  NewtonOptions options;
  options.rel_tol = newton_rel_tol;
  auto sol = solve_penalized(inst.system, load_vector(inst.system, source), params, options,
                             initial_guess);
  StateSolve out;
  out.multiplier = FemFunction(inst.mesh_ptr(), penalty_multiplier(sol.y, params));
  out.y = FemFunction(inst.mesh_ptr(), std::move(sol.y));
  out.newton_iterations = sol.newton_iterations;
  out.initial_residual = sol.initial_residual;
  out.final_residual = sol.final_residual;
  out.residual_history = std::move(sol.residual_history);
  return out;
}

ObstacleSolution solve_obstacle_pgs(const FemSystem& sys, std::span<const double> load,
                                    double tol, long max_sweeps, double omega,
                                    std::span<const double> initial_guess) {
  const std::size_t n = sys.size();
  if (load.size() != n) throw std::invalid_argument("solve_obstacle_pgs: load size mismatch");
  if (!(omega > 0.0 && omega < 2.0)) throw std::invalid_argument("PSOR omega must be in (0, 2)");
  const auto& K = sys.stiffness;
  const auto rows = K.row_offsets();
  const auto cols = K.column_indices();
  const auto vals = K.values();
  const auto& on_boundary = sys.mesh->on_boundary;

  ObstacleSolution out;
  out.y.assign(n, 0.0);
  if (!initial_guess.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      out.y[i] = on_boundary[i] ? 0.0 : std::max(0.0, initial_guess[i]);
    }
  }
  auto& y = out.y;
  out.multiplier.assign(n, 0.0);

  // Natural residual max_i |min(y_i, (K y - load)_i)| over interior nodes.
  auto natural_residual = [&] {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (on_boundary[i]) continue;
      double ky = -load[i];
      for (std::size_t k = rows[i]; k < rows[i + 1]; ++k) {
        if (!on_boundary[cols[k]]) ky += vals[k] * y[cols[k]];
      }
      out.multiplier[i] = ky;
      worst = std::max(worst, std::abs(std::min(y[i], ky)));
    }
    return worst;
  };

  out.residual = natural_residual();
  while (out.residual > tol) {
    if (out.sweeps == max_sweeps) {
      throw SolverError("projected Gauss-Seidel hit the sweep cap", static_cast<int>(out.sweeps),
                        out.residual);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (on_boundary[i]) continue;
      double diag = 0.0;
      double acc = load[i];
      for (std::size_t k = rows[i]; k < rows[i + 1]; ++k) {
        const std::size_t j = cols[k];
        if (j == i) {
          diag = vals[k];
        } else if (!on_boundary[j]) {
          acc -= vals[k] * y[j];
        }
      }
      const double gs = acc / diag;
      y[i] = std::max(0.0, y[i] + omega * (gs - y[i]));
    }
    ++out.sweeps;
    out.residual = natural_residual();
  }
  return out;
}

FemFunction solve_obstacle_reference(const BenchmarkInstance& inst, const FemFunction& z,
                                     std::span<const double> xi) {
  const FemFunction f = build_rhs(inst, xi);
  std::vector<double> source(f.size());
  for (std::size_t i = 0; i < source.size(); ++i) source[i] = f[i] + z[i];
  auto sol = solve_obstacle_pgs(inst.system, load_vector(inst.system, source));
  return FemFunction(inst.mesh_ptr(), std::move(sol.y));
}

ComplementarityResiduals complementarity_residuals(const FemFunction& y, const FemFunction& zeta,
                                                   const SparseMatrix& mass) {
  std::vector<double> neg(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) neg[i] = std::min(y[i], 0.0);
  return {l2_norm(mass, neg), std::abs(mass.bilinear_form(zeta.values(), y.values()))};
}

}  // namespace riskvi
