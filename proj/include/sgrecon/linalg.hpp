#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sgrecon {

using Vector = std::vector<double>;

/// Dense row-major matrix. A k x n sampling matrix stores the measurement
/// vectors X_1..X_k as its rows; its columns are the polytope vertices.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  Vector column(std::size_t j) const;

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

using SamplingMatrix = Matrix;

/// Pairwise-summed inner product.
double dot(std::span<const double> a, std::span<const double> b);
double pairwise_sum(std::span<const double> values);
double norm2(std::span<const double> x);
double norm1(std::span<const double> x);
double norm_inf(std::span<const double> x);

/// Returns Gamma * x; component i equals <X_i, x>.
Vector multiply(const Matrix& gamma, std::span<const double> x);
/// Returns Gamma^T * y.
Vector multiply_transpose(const Matrix& gamma, std::span<const double> y);

struct EigenRange {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

/// Eigenvalues (ascending) of a symmetric matrix by cyclic Jacobi rotations,
/// iterated until the off-diagonal Frobenius norm is at most `off_tol`.
Vector symmetric_eigenvalues(Matrix a, double off_tol = 1e-12);

/// Extreme eigenvalues of (1/k) Gamma_S^T Gamma_S for a column subset S.
EigenRange gram_extreme_eigs(const Matrix& gamma, std::span<const std::size_t> support);

/// Largest eigenvalue of Gamma^T Gamma by power iteration on a fixed start vector.
double gram_lambda_max(const Matrix& gamma, int iterations = 50);

/// Euclidean projection onto { t : ||t||_1 <= radius } by sort and threshold.
Vector project_l1_ball(std::span<const double> x, double radius);

/// Euclidean projection onto { t : |t|_2 <= radius }.
Vector project_l2_ball(std::span<const double> x, double radius);

/// Solves the square system A x = b by Gaussian elimination with partial
/// pivoting. Returns false when A is numerically singular.
bool solve_square(Matrix a, Vector b, Vector& x, double pivot_tol = 1e-12);

}  // namespace sgrecon
