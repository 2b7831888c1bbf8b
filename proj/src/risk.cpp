#include "riskvi/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace riskvi {

void RiskParams::validate() const {
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw std::invalid_argument("risk level beta must satisfy 0 <= beta < 1");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("smoothing epsilon must be > 0");
}

double v_eps(double s, const RiskParams& p) {
  if (s <= -p.epsilon) return -0.5 * p.epsilon;
  if (s < p.upper_breakpoint()) return s * s / (2.0 * p.epsilon) + s;
  const double b = p.beta;
  return (s - p.epsilon * b * b / (2.0 * (1.0 - b))) / (1.0 - b);
}

double v_eps_prime(double s, const RiskParams& p) {
  if (s <= -p.epsilon) return 0.0;
  if (s < p.upper_breakpoint()) return s / p.epsilon + 1.0;
  return 1.0 / (1.0 - p.beta);
}

double saa_objective(double s, double control_cost, std::span<const double> misfits,
                     const RiskParams& params) {
  if (misfits.empty()) throw std::invalid_argument("saa_objective: empty sample set");
  double sum = 0.0;
  for (double m : misfits) sum += v_eps(m - s, params);
  return s + sum / static_cast<double>(misfits.size()) + control_cost;
}

double saa_objective(const Control& control, std::span<const double> misfits,
                     const RiskParams& params, const SparseMatrix& mass) {
  const double zz = l2_inner(mass, control.z, control.z);
  return saa_objective(control.s, 0.5 * zz, misfits, params);
}

double cvar_exact(std::span<const double> values, double beta) {
  if (values.empty()) throw std::invalid_argument("cvar_exact: empty input");
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("cvar_exact: beta in [0,1)");
  std::vector<double> x(values.begin(), values.end());
  std::sort(x.begin(), x.end());
  const auto n = x.size();
  // suffix sums give sum_{j >= i} x_j for the candidate s = x_i
  std::vector<double> tail(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) tail[i] = tail[i + 1] + x[i];
  const double scale = 1.0 / ((1.0 - beta) * static_cast<double>(n));
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double excess = tail[i] - static_cast<double>(n - i) * x[i];
    best = std::min(best, x[i] + scale * excess);
  }
  return best;
}

SmoothedRisk smoothed_risk_min(std::span<const double> values, const RiskParams& params) {
  if (values.empty()) throw std::invalid_argument("smoothed_risk_min: empty input");
  params.validate();
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const auto slope = [&](double s) {
    double sum = 0.0;
    for (double x : values) sum += v_eps_prime(x - s, params);
    return 1.0 - sum / static_cast<double>(values.size());
  };
  // slope < 0 far left (all terms linear), >= 0 once s >= max + eps
  double lo = *mn - params.upper_breakpoint() - 1.0;
  double hi = *mx + params.epsilon;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (slope(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double s = 0.5 * (lo + hi);
  return {saa_objective(s, 0.0, values, params), s};
}

}  // namespace riskvi
