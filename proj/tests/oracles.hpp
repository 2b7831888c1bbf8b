// Independent reference computations used by the tests. Nothing here calls
// into the library's numerics beyond reading matrices.
#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "riskvi/sparse.hpp"

namespace oracle {

inline Eigen::MatrixXd dense(const riskvi::SparseMatrix& a) {
  const auto n = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  const auto rows = a.row_offsets();
  const auto cols = a.column_indices();
  const auto vals = a.values();
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = rows[i]; k < rows[i + 1]; ++k) {
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[k])) += vals[k];
    }
  }
  return d;
}

inline Eigen::VectorXd vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Bisection on a sign change down to adjacent doubles.
template <class F>
double bisect(F f, double a, double b) {
  double fa = f(a);
  for (int it = 0; it < 2000; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double fm = f(m);
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

/// u(1/2, 1/2) for -lap u = 1 on the unit square with u = 0 on the boundary,
/// from the double sine series over odd m, n.
inline double poisson_center_value() {
  const double pi = std::numbers::pi;
  double sum = 0.0;
  for (int m = 1; m < 4001; m += 2) {
    for (int n = 1; n < 4001; n += 2) {
      const double sign = (((m - 1) / 2 + (n - 1) / 2) % 2 == 0) ? 1.0 : -1.0;
      sum += sign / (static_cast<double>(m) * n * (static_cast<double>(m) * m + static_cast<double>(n) * n));
    }
  }
  return 16.0 / std::pow(pi, 4) * sum;
}

}  // namespace oracle
