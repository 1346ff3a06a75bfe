#include "sgrecon/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sgrecon {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (data_.size() != rows * cols) throw std::invalid_argument("Matrix: data size does not match shape");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector Matrix::column(std::size_t j) const {
  if (j >= cols_) throw std::out_of_range("Matrix::column: index out of range");
  Vector c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

namespace {

constexpr std::size_t kPairwiseBlock = 8;

double pairwise_dot(const double* a, const double* b, std::size_t n) {
  if (n <= kPairwiseBlock) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_dot(a, b, half) + pairwise_dot(a + half, b + half, n - half);
}

double pairwise_sum_impl(const double* a, std::size_t n) {
  if (n <= kPairwiseBlock) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_impl(a, half) + pairwise_sum_impl(a + half, n - half);
}

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                                " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_length(a.size(), b.size(), "dot");
  return pairwise_dot(a.data(), b.data(), a.size());
}

double pairwise_sum(std::span<const double> values) {
  return pairwise_sum_impl(values.data(), values.size());
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

double norm1(std::span<const double> x) {
  Vector a(x.size());
  std::transform(x.begin(), x.end(), a.begin(), [](double v) { return std::abs(v); });
  return pairwise_sum(a);
}

double norm_inf(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

Vector multiply(const Matrix& gamma, std::span<const double> x) {
  require_same_length(gamma.cols(), x.size(), "apply");
  Vector out(gamma.rows());
  for (std::size_t i = 0; i < gamma.rows(); ++i) out[i] = dot(gamma.row(i), x);
  return out;
}

Vector multiply_transpose(const Matrix& gamma, std::span<const double> y) {
  require_same_length(gamma.rows(), y.size(), "apply_transpose");
  Vector out(gamma.cols(), 0.0);
  for (std::size_t i = 0; i < gamma.rows(); ++i) {
    const auto r = gamma.row(i);
    const double yi = y[i];
    for (std::size_t j = 0; j < gamma.cols(); ++j) out[j] += yi * r[j];
  }
  return out;
}

Vector symmetric_eigenvalues(Matrix a, double off_tol) {
  const std::size_t n = a.rows();
  if (n != a.cols()) throw std::invalid_argument("symmetric_eigenvalues: matrix is not square");
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps && off_norm() > off_tol; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t r = 0; r < n; ++r) {
          const double arp = a(r, p);
          const double arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double apr = a(p, r);
          const double aqr = a(q, r);
          a(p, r) = c * apr - s * aqr;
          a(q, r) = s * apr + c * aqr;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }
  Vector eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

EigenRange gram_extreme_eigs(const Matrix& gamma, std::span<const std::size_t> support) {
  if (support.empty()) throw std::invalid_argument("gram_extreme_eigs: empty support");
  const std::size_t s = support.size();
  std::vector<Vector> cols;
  cols.reserve(s);
  for (std::size_t j : support) cols.push_back(gamma.column(j));
  const double inv_k = 1.0 / static_cast<double>(gamma.rows());
  Matrix g(s, s);
  for (std::size_t a = 0; a < s; ++a) {
    for (std::size_t b = a; b < s; ++b) {
      const double v = dot(cols[a], cols[b]) * inv_k;
      g(a, b) = v;
      g(b, a) = v;
    }
  }
  const Vector eig = symmetric_eigenvalues(std::move(g));
  return {eig.front(), eig.back()};
}

double gram_lambda_max(const Matrix& gamma, int iterations) {
  const std::size_t n = gamma.cols();
  if (n == 0 || gamma.rows() == 0) return 0.0;
  // Deterministic start with no special alignment to coordinate axes.
  Vector v(n);
  for (std::size_t j = 0; j < n; ++j) v[j] = 1.0 + 0.5 * std::sin(static_cast<double>(j) + 1.0);
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const double nv = norm2(v);
    if (nv == 0.0) return 0.0;
    for (double& x : v) x /= nv;
    Vector w = multiply_transpose(gamma, multiply(gamma, v));
    lambda = dot(v, w);
    v = std::move(w);
  }
  return lambda;
}

Vector project_l1_ball(std::span<const double> x, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("project_l1_ball: radius must be positive");
  if (norm1(x) <= radius) return Vector(x.begin(), x.end());
  Vector u(x.size());
  std::transform(x.begin(), x.end(), u.begin(), [](double v) { return std::abs(v); });
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double threshold = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    const double t = (cumsum - radius) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) threshold = t;
  }
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double mag = std::max(std::abs(x[i]) - threshold, 0.0);
    out[i] = std::copysign(mag, x[i]);
  }
  return out;
}

Vector project_l2_ball(std::span<const double> x, double radius) {
  const double nx = norm2(x);
  Vector out(x.begin(), x.end());
  if (nx > radius) {
    const double s = radius / nx;
    for (double& v : out) v *= s;
  }
  return out;
}

bool solve_square(Matrix a, Vector b, Vector& x, double pivot_tol) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) throw std::invalid_argument("solve_square: shape mismatch");
  double scale = 0.0;
  for (double v : a.data()) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return n == 0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    if (std::abs(a(piv, c)) <= pivot_tol * scale) return false;
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(c, j), a(piv, j));
      std::swap(b[c], b[piv]);
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a(r, c) / a(c, c);
      if (f == 0.0) continue;
      for (std::size_t j = c; j < n; ++j) a(r, j) -= f * a(c, j);
      b[r] -= f * b[c];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return true;
}

}  // namespace sgrecon
