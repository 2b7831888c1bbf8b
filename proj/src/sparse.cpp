#include "riskvi/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace riskvi {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

SparseMatrix SparseMatrix::from_triplets(std::size_t n, std::span<const Triplet> triplets,
                                         bool symmetric) {
  std::vector<std::size_t> count(n + 1, 0);
  for (const auto& t : triplets) {
    if (t.row >= n || t.col >= n) throw std::out_of_range("SparseMatrix: triplet index");
    ++count[t.row + 1];
  }
  std::partial_sum(count.begin(), count.end(), count.begin());

  std::vector<std::size_t> cols(triplets.size());
  std::vector<double> vals(triplets.size());
  std::vector<std::size_t> fill(count.begin(), count.end() - 1);
  for (const auto& t : triplets) {
    const auto k = fill[t.row]++;
    cols[k] = t.col;
    vals[k] = t.value;
  }

  SparseMatrix m;
  m.n_ = n;
  m.symmetric_ = symmetric;
  m.row_ptr_.assign(1, 0);
  m.row_ptr_.reserve(n + 1);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i) {
    order.resize(count[i + 1] - count[i]);
    std::iota(order.begin(), order.end(), count[i]);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return cols[a] < cols[b]; });
    for (std::size_t k = 0; k < order.size(); ++k) {
      const auto src = order[k];
      if (k > 0 && cols[src] == m.cols_.back()) {
        m.values_.back() += vals[src];
      } else {
        m.cols_.push_back(cols[src]);
        m.values_.push_back(vals[src]);
      }
    }
    m.row_ptr_.push_back(m.cols_.size());
  }

  m.diag_pos_.assign(n, static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < n; ++i) {
    for (auto k = m.row_ptr_[i]; k < m.row_ptr_[i + 1]; ++k) {
      if (m.cols_[k] == i) m.diag_pos_[i] = k;
    }
  }
  return m;
}

SparseMatrix SparseMatrix::diagonal(std::span<const double> diag) {
  std::vector<Triplet> t;
  t.reserve(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) t.push_back({i, i, diag[i]});
  return from_triplets(diag.size(), t, true);
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  return diagonal(std::vector<double>(n, 1.0));
}

double SparseMatrix::operator()(std::size_t i, std::size_t j) const {
  const auto first = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
  const auto last = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - cols_.begin())];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (auto k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[cols_[k]];
    y[i] = s;
  }
}

std::vector<double> SparseMatrix::operator*(std::span<const double> x) const {
  std::vector<double> y(n_);
  multiply(x, y);
  return y;
}

double SparseMatrix::bilinear_form(std::span<const double> x, std::span<const double> y) const {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    double r = 0.0;
    for (auto k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) r += values_[k] * y[cols_[k]];
    s += x[i] * r;
  }
  return s;
}

double SparseMatrix::quadratic_form(std::span<const double> x) const {
  return bilinear_form(x, x);
}

std::vector<double> SparseMatrix::diagonal_entries() const {
  std::vector<double> d(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    if (diag_pos_[i] != static_cast<std::size_t>(-1)) d[i] = values_[diag_pos_[i]];
  }
  return d;
}

std::vector<double> SparseMatrix::row_sums() const {
  std::vector<double> r(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    for (auto k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) r[i] += values_[k];
  }
  return r;
}

SparseMatrix SparseMatrix::plus_diagonal(std::span<const double> d) const {
  SparseMatrix m = *this;
  for (std::size_t i = 0; i < n_; ++i) {
    if (d[i] == 0.0) continue;
    if (diag_pos_[i] == static_cast<std::size_t>(-1)) {
      throw std::logic_error("SparseMatrix::plus_diagonal: missing diagonal entry");
    }
    m.values_[diag_pos_[i]] += d[i];
  }
  return m;
}

double SparseMatrix::asymmetry() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (auto k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      worst = std::max(worst, std::abs(values_[k] - (*this)(cols_[k], i)));
    }
  }
  return worst;
}

SparseMatrix SparseMatrix::eliminate(std::span<const char> fixed) const {
  SparseMatrix m = *this;
  for (std::size_t i = 0; i < n_; ++i) {
    for (auto k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const auto j = cols_[k];
      if (fixed[i] || fixed[j]) m.values_[k] = (i == j) ? 1.0 : 0.0;
    }
    if (fixed[i] && diag_pos_[i] == static_cast<std::size_t>(-1)) {
      throw std::logic_error("SparseMatrix::eliminate: missing diagonal entry");
    }
  }
  return m;
}

SolveStats solve_sparse(const SparseMatrix& matrix, std::span<const double> rhs,
                        std::span<double> x, double rel_tol, int max_iterations) {
  const std::size_t n = matrix.size();
  if (rhs.size() != n || x.size() != n) {
    throw std::invalid_argument("solve_sparse: dimension mismatch");
  }
  if (max_iterations <= 0) max_iterations = static_cast<int>(10 * n);

  SolveStats stats;
  stats.rhs_norm = norm2(rhs);
  if (stats.rhs_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return stats;
  }
  const double target = rel_tol * stats.rhs_norm;

  std::vector<double> inv_diag = matrix.diagonal_entries();
  for (auto& d : inv_diag) {
    if (!(d > 0.0)) throw std::invalid_argument("solve_sparse: non-positive diagonal");
    d = 1.0 / d;
  }

  std::vector<double> r(n), z(n), p(n), q(n);
  matrix.multiply(x, q);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - q[i];
  double rnorm = norm2(r);
  if (rnorm <= target) {
    stats.residual_norm = rnorm;
    return stats;
  }
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);

  for (int it = 1; it <= max_iterations; ++it) {
    matrix.multiply(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) {
      throw SolverError("solve_sparse: matrix is not positive definite", it, rnorm);
    }
    const double alpha = rz / pq;
    double rr = 0.0;
    double rz_new = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
      z[i] = inv_diag[i] * r[i];
      rr += r[i] * r[i];
      rz_new += r[i] * z[i];
    }
    rnorm = std::sqrt(rr);
    if (rnorm <= target) {
      // confirm against the true residual; recurrences drift at tight tolerances
      matrix.multiply(x, q);
      for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - q[i];
      rnorm = norm2(r);
      if (rnorm <= target) {
        stats.iterations = it;
        stats.residual_norm = rnorm;
        return stats;
      }
      for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
      p = z;
      rz = dot(r, z);
      continue;
    }
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw SolverError("solve_sparse: no convergence within " + std::to_string(max_iterations) +
                        " iterations (relative residual " + std::to_string(rnorm / stats.rhs_norm) +
                        ")",
                    max_iterations, rnorm);
}

std::vector<double> solve_sparse(const SparseMatrix& matrix, std::span<const double> rhs,
                                 double rel_tol) {
  std::vector<double> x(rhs.size(), 0.0);
  solve_sparse(matrix, rhs, x, rel_tol);
  return x;
}

}  // namespace riskvi
