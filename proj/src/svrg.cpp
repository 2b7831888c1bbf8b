#include "riskvi/svrg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "riskvi/io.hpp"
#include "riskvi/rng.hpp"

namespace riskvi {

std::string to_string(StopRule rule) {
  return rule == StopRule::Printed ? "printed" : "gradient";
}

StopRule parse_stop_rule(std::string_view text) {
  if (text == "gradient") return StopRule::Gradient;
  if (text == "printed") return StopRule::Printed;
  throw std::invalid_argument("unknown stop rule '" + std::string(text) + "'");
}

void SvrgConfig::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must be in (0, 1)");
  if (!(tau_initial > 0.0)) throw std::invalid_argument("tau_initial must be > 0");
  if (!(tau_final > 0.0 && tau_final <= tau_initial)) {
    throw std::invalid_argument("tau_final must be in (0, tau_initial]");
  }
  if (update_frequency < 1) throw std::invalid_argument("update frequency r must be >= 1");
  if (tol < 0.0) throw std::invalid_argument("tol must be > 0 (or 0 for the default)");
  if (n < 1) throw std::invalid_argument("sample count n must be >= 1");
  if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
  if (predrawn_lengths < 1) throw std::invalid_argument("predrawn_lengths must be >= 1");
}

std::vector<double> SvrgConfig::tau_ladder() const {
  std::vector<double> ladder;
  for (int j = 0;; ++j) {
    const double tau = tau_initial * std::pow(gamma, j);
    if (tau < tau_final * (1.0 - 1e-9)) break;
    ladder.push_back(tau);
  }
  return ladder;
}

double SvrgConfig::resolved_tol(const Mesh& mesh) const {
  return tol > 0.0 ? tol : 5e-4 * mesh.h * mesh.h;
}

StepRule step_constants() {
  auto f = [](double v) { return ((2.0 * v + 1.0) * v - 3.0) * v - 1.0; };
  double lo = 1.0, hi = 2.0;
  while (hi - lo > 1e-14) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  const double nu = 0.5 * (lo + hi);
  return {1.0 / (2.0 * nu) + 1.0, nu};
}

double step_size(const StepRule& rule, long k, long l) {
  if (k < 1 || l < 1) throw std::invalid_argument("step_size: k and l start at 1");
  return std::sqrt(rule.theta / (static_cast<double>(k) * static_cast<double>(l) + rule.nu));
}

EpochResult svrg_epoch(const BenchmarkInstance& inst, const Control& u_tilde,
                       const FullGradient& reference, const SampleSet& samples,
                       const PenaltyParams& params, const StepRule& rule, long k,
                       std::span<const std::size_t> indices, const GradientOptions& options,
                       WarmStarts* warm) {
  const std::size_t n = samples.samples.size();
  if (reference.per_sample.size() != n) {
    throw std::invalid_argument("svrg_epoch: reference gradients missing");
  }
  if (warm != nullptr && warm->states.size() != n) warm->states.assign(n, {});
  const std::size_t nodes = inst.system.size();
  const auto& ghat = reference.mean;

  EpochResult out;
  out.control = u_tilde;
  auto& z = out.control.z;
  long l = 0;
  for (const std::size_t i : indices) {
    if (i >= n) throw std::out_of_range("svrg_epoch: sample index out of range");
    ++l;
    const auto ev = evaluate_sample(inst, out.control, samples.samples[i], params, options,
                                    warm != nullptr ? &warm->states[i] : nullptr);
    out.pde_solves += 2;
    const auto& g = ev.gradient;
    const auto& g1 = reference.per_sample[i];
    if (l == 1) {
      double worst = std::abs(g.ds - g1.ds);
      for (std::size_t q = 0; q < nodes; ++q) worst = std::max(worst, std::abs(g.dz[q] - g1.dz[q]));
      out.first_step_mismatch = worst;
    }
    const double t = step_size(rule, k, l);
    for (std::size_t q = 0; q < nodes; ++q) z[q] -= t * (g.dz[q] - g1.dz[q] + ghat.dz[q]);
    out.control.s -= t * (g.ds - g1.ds + ghat.ds);
  }
  out.inner_steps = l;
  return out;
}

namespace {

// Stream order: all epoch lengths, then the samples, then one index vector
// per epoch as it starts.
std::vector<long> draw_lengths(const SvrgConfig& config, Rng& rng) {
  const long count = std::max<long>(
      config.predrawn_lengths, config.max_epochs * static_cast<long>(config.tau_ladder().size()));
  std::vector<long> lengths(static_cast<std::size_t>(count));
  for (auto& v : lengths) v = rng.uniform_int(1, config.update_frequency);
  return lengths;
}

}  // namespace

SampleSet draw_run_samples(const BenchmarkInstance& inst, const SvrgConfig& config) {
  config.validate();
  Rng rng(config.seed);
  draw_lengths(config, rng);
  return sample_xi(inst.expansion, config.n, rng, config.seed);
}

namespace {

RunReport path_following(const BenchmarkInstance& inst, const SvrgConfig& config,
                         const SampleSet* given, const HistoryCallback& on_row) {
  config.validate();
  inst.risk.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto ladder = config.tau_ladder();
  const StepRule rule = step_constants();

  RunReport rep;
  rep.config = config;
  rep.tol = config.resolved_tol(inst.mesh());

  Rng rng(config.seed);
  const auto lengths = draw_lengths(config, rng);
  rep.samples = given != nullptr ? *given : sample_xi(inst.expansion, config.n, rng, config.seed);
  const std::size_t n = rep.samples.samples.size();
  if (n == 0) throw std::invalid_argument("run_path_following: empty sample set");
  rep.config.n = n;

  Control u{FemFunction(inst.mesh_ptr(), config.z_initial), config.s_initial};
  WarmStarts warm;
  FullGradient fg;

  for (const double tau : ladder) {
    const PenaltyParams params{tau};
    long epochs_here = 0;
    bool accepted = false;
    for (;;) {
      fg = full_gradient(inst, u, rep.samples, params, config.gradient, &warm, true);
      ++rep.full_grad_count;
      rep.pde_solves += fg.pde_solves;
      const double printed = residual(inst, u, fg);
      const double grad = gradient_residual(inst, fg);
      const double r = config.stop_rule == StopRule::Printed ? printed : grad;
      accepted = r <= rep.tol;
      const bool capped = !accepted && epochs_here == config.max_epochs;

      HistoryRow row;
      row.tau = tau;
      row.epoch = rep.epochs;
      row.objective = fg.objective;
      row.residual = r;
      row.printed_residual = printed;
      row.gradient_residual = grad;
      row.n_k = (accepted || capped) ? 0 : lengths[static_cast<std::size_t>(rep.epochs)];
      row.full_grad_count = rep.full_grad_count;
      row.pde_solves = rep.pde_solves;
      row.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      rep.history.push_back(row);
      if (on_row) on_row(row);
      rep.objective = fg.objective;
      rep.residual = r;
      if (accepted) break;
      if (capped) {
        if (config.strict) {
          throw std::runtime_error("middle loop reached " + std::to_string(config.max_epochs) +
                                   " epochs at tau " + format_double(tau) + " (residual " +
                                   format_double(r) + ", tol " + format_double(rep.tol) + ")");
        }
        break;
      }

      std::vector<std::size_t> indices(static_cast<std::size_t>(row.n_k));
      for (auto& i : indices) {
        i = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(n)) - 1);
      }
      ++rep.epochs;
      ++epochs_here;
      auto ep = svrg_epoch(inst, u, fg, rep.samples, params, rule, rep.epochs, indices,
                           config.gradient, &warm);
      rep.inner_steps += ep.inner_steps;
      rep.pde_solves += ep.pde_solves;
      rep.first_step_mismatch = std::max(rep.first_step_mismatch, ep.first_step_mismatch);
      u = std::move(ep.control);
    }
    rep.tau_converged.push_back(accepted ? 1 : 0);
    if (!accepted) rep.converged = false;
    rep.stationarity.push_back(
        stationarity_report(inst, u, rep.samples, params, config.gradient, &warm));
    rep.report_pde_solves += 2 * static_cast<long>(n);
  }

  rep.control = u;
  rep.mean_y = fg.mean_y;
  rep.mean_zeta = fg.mean_zeta;
  return rep;
}

}  // namespace

RunReport run_path_following(const BenchmarkInstance& inst, const SvrgConfig& config,
                             const HistoryCallback& on_row) {
  return path_following(inst, config, nullptr, on_row);
}

RunReport run_path_following(const BenchmarkInstance& inst, const SvrgConfig& config,
                             const SampleSet& samples, const HistoryCallback& on_row) {
  return path_following(inst, config, &samples, on_row);
}

std::string history_csv(const RunReport& rep) {
  std::string out =
      "tau,epoch,objective,residual,n_k,full_grad_count,pde_solves,printed_residual,"
      "gradient_residual\n";
  for (const auto& r : rep.history) {
    out += format_double(r.tau) + ',' + std::to_string(r.epoch) + ',' +
           format_double(r.objective) + ',' + format_double(r.residual) + ',' +
           std::to_string(r.n_k) + ',' + std::to_string(r.full_grad_count) + ',' +
           std::to_string(r.pde_solves) + ',' + format_double(r.printed_residual) + ',' +
           format_double(r.gradient_residual) + '\n';
  }
  return out;
}

std::string timing_csv(const RunReport& rep) {
  std::string out = "tau,epoch,wall_seconds\n";
  for (const auto& r : rep.history) {
    out += format_double(r.tau) + ',' + std::to_string(r.epoch) + ',' +
           format_double(r.wall_seconds) + '\n';
  }
  return out;
}

std::string stationarity_csv(const RunReport& rep) {
  std::string out = StationarityReport::csv_header() + ",converged\n";
  for (std::size_t j = 0; j < rep.stationarity.size(); ++j) {
    out += rep.stationarity[j].csv_row() + ',' + (rep.tau_converged[j] ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace riskvi
