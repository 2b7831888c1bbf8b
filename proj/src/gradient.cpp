#include "riskvi/gradient.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "riskvi/io.hpp"

namespace riskvi {

std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("RISKVI_WORKERS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) {
      throw std::invalid_argument("RISKVI_WORKERS must be a positive integer");
    }
    return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

// Runs body(i) for i in [0, n). Work is handed out by an atomic counter;
// callers store results by index so the order of completion is irrelevant.
// The exception of the lowest failing index is rethrown.
template <class Body>
void parallel_for(std::size_t n, std::size_t workers, Body&& body) {
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr err;
  std::size_t err_index = n;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(err_mutex);
        if (i < err_index) {
          err_index = i;
          err = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

std::vector<double> difference(const FemFunction& a, const FemFunction& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

double misfit_of(const BenchmarkInstance& inst, const FemFunction& y) {
  const auto d = difference(y, inst.y_d);
  return 0.5 * inst.system.mass.quadratic_form(d);
}

double lumped_norm_sq(const FemSystem& sys, std::span<const double> v) {
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) acc += sys.lumped_mass[i] * v[i] * v[i];
  return acc;
}

void check_samples(const BenchmarkInstance& inst, const SampleSet& samples) {
  if (samples.samples.empty()) throw std::invalid_argument("sample set is empty");
  for (const auto& xi : samples.samples) {
    if (xi.size() != inst.expansion.terms.size()) {
      throw std::invalid_argument("sample dimension does not match the noise model");
    }
  }
}

void prepare_warm(WarmStarts* warm, std::size_t n) {
  if (warm != nullptr && warm->states.size() != n) warm->states.assign(n, {});
}

}  // namespace

FemFunction solve_adjoint(const BenchmarkInstance& inst, const FemFunction& y,
                          const PenaltyParams& params, double scale, double rel_tol) {
  const auto& sys = inst.system;
  if (y.size() != sys.size()) throw std::invalid_argument("solve_adjoint: state size");
  auto rhs = sys.mass * difference(y, inst.y_d);
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    rhs[i] = sys.mesh->on_boundary[i] ? 0.0 : scale * rhs[i];
  }
  const auto jac = sys.dirichlet_stiffness.plus_diagonal(penalty_jacobian_diagonal(sys, y.values(), params));
  return FemFunction(inst.mesh_ptr(), solve_sparse(jac, rhs, rel_tol));
}

SampleEvaluation evaluate_sample(const BenchmarkInstance& inst, const Control& control,
                                 std::span<const double> xi, const PenaltyParams& params,
                                 const GradientOptions& options, std::vector<double>* warm) {
  std::span<const double> guess;
  if (warm != nullptr) guess = *warm;
  auto state = solve_state(inst, control.z, xi, params, options.newton_rel_tol, guess);
  SampleEvaluation ev;
  ev.misfit = misfit_of(inst, state.y);
  ev.scale = v_eps_prime(ev.misfit - control.s, inst.risk);
  ev.p = solve_adjoint(inst, state.y, params, ev.scale, options.adjoint_rel_tol);
  std::vector<double> dz(ev.p.size());
  for (std::size_t i = 0; i < dz.size(); ++i) dz[i] = ev.p[i] + control.z[i];
  ev.gradient.dz = FemFunction(inst.mesh_ptr(), std::move(dz));
  ev.gradient.ds = 1.0 - ev.scale;
  if (warm != nullptr) *warm = state.y.vector();
  ev.y = std::move(state.y);
  return ev;
}

ControlGradient stochastic_gradient(const BenchmarkInstance& inst, const Control& control,
                                    std::span<const double> xi, const PenaltyParams& params,
                                    const GradientOptions& options) {
  return evaluate_sample(inst, control, xi, params, options).gradient;
}

double sample_objective(const BenchmarkInstance& inst, const Control& control,
                        std::span<const double> xi, const PenaltyParams& params,
                        const GradientOptions& options) {
  const auto state = solve_state(inst, control.z, xi, params, options.newton_rel_tol);
  const double m = misfit_of(inst, state.y);
  return saa_objective(control, std::span<const double>(&m, 1), inst.risk, inst.system.mass);
}

FullGradient full_gradient(const BenchmarkInstance& inst, const Control& control,
                           const SampleSet& samples, const PenaltyParams& params,
                           const GradientOptions& options, WarmStarts* warm,
                           bool keep_per_sample) {
  check_samples(inst, samples);
  const std::size_t n = samples.samples.size();
  const std::size_t nodes = inst.system.size();
  prepare_warm(warm, n);
  std::vector<SampleEvaluation> evals(n);
  parallel_for(n, resolve_workers(options.workers), [&](std::size_t i) {
    evals[i] = evaluate_sample(inst, control, samples.samples[i], params, options,
                               warm != nullptr ? &warm->states[i] : nullptr);
  });

  FullGradient out;
  std::vector<double> sum_y(nodes, 0.0), sum_p(nodes, 0.0), sum_zeta(nodes, 0.0);
  double sum_ds = 0.0;
  out.misfits.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ev = evals[i];
    const auto zeta = penalty_multiplier(ev.y.values(), params);
    for (std::size_t k = 0; k < nodes; ++k) {
      sum_y[k] += ev.y[k];
      sum_p[k] += ev.p[k];
      sum_zeta[k] += zeta[k];
    }
    sum_ds += ev.gradient.ds;
    out.misfits[i] = ev.misfit;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> dz(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    sum_y[k] *= inv_n;
    sum_p[k] *= inv_n;
    sum_zeta[k] *= inv_n;
    dz[k] = sum_p[k] + control.z[k];
  }
  out.mean.dz = FemFunction(inst.mesh_ptr(), std::move(dz));
  out.mean.ds = sum_ds * inv_n;
  out.mean_y = FemFunction(inst.mesh_ptr(), std::move(sum_y));
  out.mean_p = FemFunction(inst.mesh_ptr(), std::move(sum_p));
  out.mean_zeta = FemFunction(inst.mesh_ptr(), std::move(sum_zeta));
  out.objective = saa_objective(control, out.misfits, inst.risk, inst.system.mass);
  out.pde_solves = 2 * static_cast<long>(n);
  if (keep_per_sample) {
    out.per_sample.reserve(n);
    for (auto& ev : evals) out.per_sample.push_back(std::move(ev.gradient));
  }
  return out;
}

double residual(const BenchmarkInstance& inst, const Control& control, const FullGradient& full) {
  const double first = inst.system.l2_norm(full.mean.dz.values());
  const double m = misfit_of(inst, full.mean_y);
  return first + std::abs(1.0 - v_eps_prime(m - control.s, inst.risk));
}

double gradient_residual(const BenchmarkInstance& inst, const FullGradient& full) {
  return inst.system.l2_norm(full.mean.dz.values()) + std::abs(full.mean.ds);
}

double residual(const BenchmarkInstance& inst, const Control& control, const SampleSet& samples,
                const PenaltyParams& params, const GradientOptions& options) {
  return residual(inst, control, full_gradient(inst, control, samples, params, options));
}

std::string StationarityReport::csv_header() {
  return "tau,comp_state,comp_multiplier,pairing_zeta_p,pairing_zeta_p_weighted,"
         "sign_lambda_p,constraint_violation,zeta_norm,y_norm,lambda_norm,p_norm";
}

std::string StationarityReport::csv_row() const {
  const double fields[] = {tau,           comp_state,           comp_multiplier,
                           pairing_zeta_p, pairing_zeta_p_weighted, sign_lambda_p,
                           constraint_violation, zeta_norm,     y_norm,
                           lambda_norm,   p_norm};
  std::string row;
  for (double v : fields) {
    if (!row.empty()) row += ',';
    row += format_double(v);
  }
  return row;
}

StationarityReport stationarity_report(const BenchmarkInstance& inst, const Control& control,
                                       const SampleSet& samples, const PenaltyParams& params,
                                       const GradientOptions& options, WarmStarts* warm) {
  check_samples(inst, samples);
  const auto& sys = inst.system;
  const auto& on_boundary = sys.mesh->on_boundary;
  const std::size_t n = samples.samples.size();
  const std::size_t nodes = sys.size();
  prepare_warm(warm, n);

  struct PerSample {
    double comp_state, comp_multiplier, zeta_p, zeta_p_weighted, lambda_p;
    double violation_sq, zeta_sq, y_sq, lambda_sq, p_sq;
    std::vector<double> zeta, lambda;
  };
  std::vector<PerSample> rows(n);
  parallel_for(n, resolve_workers(options.workers), [&](std::size_t i) {
    std::span<const double> guess;
    if (warm != nullptr) guess = warm->states[i];
    const auto state = solve_state(inst, control.z, samples.samples[i], params,
                                   options.newton_rel_tol, guess);
    if (warm != nullptr) warm->states[i] = state.y.vector();
    const auto& y = state.y;
    const double pi = v_eps_prime(misfit_of(inst, y) - control.s, inst.risk);
    const auto p = solve_adjoint(inst, y, params, 1.0, options.adjoint_rel_tol);
    auto lambda = sys.mass * difference(y, inst.y_d);
    const auto kp = sys.stiffness * p.values();
    PerSample r{};
    std::vector<double> neg(nodes);
    for (std::size_t k = 0; k < nodes; ++k) {
      neg[k] = std::min(y[k], 0.0);
      if (on_boundary[k]) {
        lambda[k] = 0.0;
        continue;
      }
      lambda[k] -= kp[k];
      const double ml = sys.lumped_mass[k];
      const double zeta_dual = ml * state.multiplier[k];
      r.comp_state += zeta_dual * y[k];
      r.zeta_p += zeta_dual * p[k];
      r.comp_multiplier += lambda[k] * y[k];
      r.lambda_p += lambda[k] * p[k];
      r.lambda_sq += lambda[k] * lambda[k] / ml;
      lambda[k] /= ml;
    }
    r.zeta_p_weighted = pi * r.zeta_p;
    r.violation_sq = sys.mass.quadratic_form(neg);
    r.zeta_sq = lumped_norm_sq(sys, state.multiplier.values());
    r.y_sq = lumped_norm_sq(sys, y.values());
    r.p_sq = lumped_norm_sq(sys, p.values());
    r.zeta = state.multiplier.vector();
    r.lambda = std::move(lambda);
    rows[i] = std::move(r);
  });

  StationarityReport rep;
  rep.tau = params.tau;
  std::vector<double> zeta(nodes, 0.0), lambda(nodes, 0.0);
  double violation_sq = 0.0, zeta_sq = 0.0, y_sq = 0.0, lambda_sq = 0.0, p_sq = 0.0;
  for (const auto& r : rows) {
    rep.comp_state += r.comp_state;
    rep.comp_multiplier += r.comp_multiplier;
    rep.pairing_zeta_p += r.zeta_p;
    rep.pairing_zeta_p_weighted += r.zeta_p_weighted;
    rep.sign_lambda_p += r.lambda_p;
    violation_sq += r.violation_sq;
    zeta_sq += r.zeta_sq;
    y_sq += r.y_sq;
    lambda_sq += r.lambda_sq;
    p_sq += r.p_sq;
    for (std::size_t k = 0; k < nodes; ++k) {
      zeta[k] += r.zeta[k];
      lambda[k] += r.lambda[k];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  rep.comp_state *= inv_n;
  rep.comp_multiplier *= inv_n;
  rep.pairing_zeta_p *= inv_n;
  rep.pairing_zeta_p_weighted *= inv_n;
  rep.sign_lambda_p *= inv_n;
  rep.constraint_violation = std::sqrt(violation_sq * inv_n);
  rep.zeta_norm = std::sqrt(zeta_sq * inv_n);
  rep.y_norm = std::sqrt(y_sq * inv_n);
  rep.lambda_norm = std::sqrt(lambda_sq * inv_n);
  rep.p_norm = std::sqrt(p_sq * inv_n);
  for (std::size_t k = 0; k < nodes; ++k) {
    zeta[k] *= inv_n;
    lambda[k] *= inv_n;
  }
  rep.zeta = FemFunction(inst.mesh_ptr(), std::move(zeta));
  rep.lambda = FemFunction(inst.mesh_ptr(), std::move(lambda));
  return rep;
}

}  // namespace riskvi
