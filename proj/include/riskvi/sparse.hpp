#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace riskvi {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Square matrix in compressed sparse row format. Column indices are sorted
/// within each row and duplicates are summed on construction.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  static SparseMatrix from_triplets(std::size_t n, std::span<const Triplet> triplets,
                                    bool symmetric = false);
  static SparseMatrix diagonal(std::span<const double> diag);
  static SparseMatrix identity(std::size_t n);

  std::size_t size() const { return n_; }
  std::size_t nonzeros() const { return values_.size(); }
  bool symmetric() const { return symmetric_; }

  std::span<const std::size_t> row_offsets() const { return row_ptr_; }
  std::span<const std::size_t> column_indices() const { return cols_; }
  std::span<const double> values() const { return values_; }

  /// Entry lookup; zero if (i, j) is not stored.
  double operator()(std::size_t i, std::size_t j) const;

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> operator*(std::span<const double> x) const;
  double quadratic_form(std::span<const double> x) const;
  double bilinear_form(std::span<const double> x, std::span<const double> y) const;

  std::vector<double> diagonal_entries() const;
  std::vector<double> row_sums() const;
  /// Copy with `d` added onto the diagonal (diagonal entries must be stored).
  SparseMatrix plus_diagonal(std::span<const double> d) const;

  /// Max |A_ij - A_ji| over stored entries.
  double asymmetry() const;

  /// Zero rows and columns of the flagged indices and put 1 on their diagonal.
  SparseMatrix eliminate(std::span<const char> fixed) const;

 private:
  std::size_t n_ = 0;
  bool symmetric_ = false;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> cols_;
  std::vector<double> values_;
  std::vector<std::size_t> diag_pos_;
};

struct SolveStats {
  int iterations = 0;
  double residual_norm = 0.0;
  double rhs_norm = 0.0;
};

/// Raised when an iterative solve misses its tolerance within the cap.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, int iterations, double achieved)
      : std::runtime_error(what), iterations_(iterations), achieved_(achieved) {}
  int iterations() const { return iterations_; }
  double achieved_residual() const { return achieved_; }

 private:
  int iterations_;
  double achieved_;
};

/// Jacobi-preconditioned conjugate gradients for SPD systems.
///
/// On entry `x` holds the initial guess. Stops once
/// ||b - A x||_2 <= rel_tol * ||b||_2. The iteration cap defaults to 10 n.
SolveStats solve_sparse(const SparseMatrix& matrix, std::span<const double> rhs,
                        std::span<double> x, double rel_tol, int max_iterations = 0);

std::vector<double> solve_sparse(const SparseMatrix& matrix, std::span<const double> rhs,
                                 double rel_tol);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace riskvi
