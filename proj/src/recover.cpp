#include "sgrecon/recover.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sgrecon/lp.hpp"

namespace sgrecon {

void SparseVector::validate() const {
  if (support.size() != values.size()) throw std::invalid_argument("SparseVector: support and values differ in size");
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] >= n) throw std::invalid_argument("SparseVector: index out of range");
    if (i > 0 && support[i] <= support[i - 1]) throw std::invalid_argument("SparseVector: support not strictly increasing");
    if (values[i] == 0.0) throw std::invalid_argument("SparseVector: stored value is zero");
  }
}

Vector SparseVector::dense() const {
  Vector x(n, 0.0);
  for (std::size_t i = 0; i < support.size(); ++i) x[support[i]] = values[i];
  return x;
}

SparseVector SparseVector::from_dense(std::span<const double> x) {
  SparseVector z;
  z.n = x.size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) {
      z.support.push_back(i);
      z.values.push_back(x[i]);
    }
  }
  return z;
}

bool is_exact(double linf_error, const SparseVector& z) {
  double zmax = 0.0;
  for (double v : z.values) zmax = std::max(zmax, std::abs(v));
  return linf_error <= 1e-6 * (1.0 + zmax);
}

RecoveryTrial exact_recover(const SamplingMatrix& gamma, const SparseVector& z) {
  z.validate();
  if (z.n != gamma.cols()) throw std::invalid_argument("exact_recover: dimension mismatch");
  const auto start = std::chrono::steady_clock::now();
  RecoveryTrial trial;
  const Vector zd = z.dense();
  const Vector y = multiply(gamma, zd);
  try {
    trial.solution = basis_pursuit(gamma, y);
    double err = 0.0;
    for (std::size_t i = 0; i < zd.size(); ++i) err = std::max(err, std::abs(trial.solution[i] - zd[i]));
    trial.linf_error = err;
    const Vector r = multiply(gamma, trial.solution);
    for (std::size_t i = 0; i < y.size(); ++i) trial.residual = std::max(trial.residual, std::abs(r[i] - y[i]));
    trial.outcome = is_exact(err, z) ? RecoveryOutcome::ExactSuccess : RecoveryOutcome::Failure;
  } catch (const std::runtime_error& e) {
    trial.outcome = RecoveryOutcome::Failure;
    trial.linf_error = std::numeric_limits<double>::infinity();
    trial.diagnostic = e.what();
  }
  trial.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return trial;
}

namespace {

Vector project_onto(const SetDescriptor& set, std::span<const double> x) {
  if (const auto* l1 = std::get_if<L1Ball>(&set.shape)) return project_l1_ball(x, l1->radius);
  if (const auto* l2 = std::get_if<EuclideanBall>(&set.shape)) return project_l2_ball(x, l2->radius);
  throw std::invalid_argument("approx_reconstruct: set kind has no exact projector");
}

}  // namespace

ApproxResult approx_reconstruct(const SamplingMatrix& gamma, std::span<const double> y,
                                const SetDescriptor& set, double epsilon, std::size_t max_iters,
                                bool record_trace, std::span<const double> start) {
  if (!std::holds_alternative<L1Ball>(set.shape) && !std::holds_alternative<EuclideanBall>(set.shape))
    throw std::invalid_argument("approx_reconstruct: set kind has no exact projector");
  if (!(epsilon >= 0.0)) throw std::invalid_argument("approx_reconstruct: epsilon must be nonnegative");
  if (y.size() != gamma.rows() || set.n != gamma.cols())
    throw std::invalid_argument("approx_reconstruct: dimension mismatch");
  const std::size_t n = gamma.cols();
  const double k = static_cast<double>(gamma.rows());

  ApproxResult res;
  if (start.empty()) {
    res.t.assign(n, 0.0);
  } else {
    if (start.size() != n) throw std::invalid_argument("approx_reconstruct: start has wrong dimension");
    res.t = project_onto(set, start);
  }
  Vector r(y.size());
  auto update_residual = [&] {
    const Vector gt = multiply(gamma, res.t);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = gt[i] - y[i];
    const double sq = dot(r, r);
    res.residual = std::sqrt(sq / k);
    if (record_trace) res.objective_trace.push_back(0.5 * sq / k);
  };
  update_residual();
  if (res.residual <= epsilon) {
    res.converged = true;
    return res;
  }
  const double lipschitz = gram_lambda_max(gamma) / k;
  if (!(lipschitz > 0.0)) return res;
  const double step = 1.0 / lipschitz;
  Vector next(n);
  while (res.iterations < max_iters) {
    const Vector grad = multiply_transpose(gamma, r);
    for (std::size_t j = 0; j < n; ++j) next[j] = res.t[j] - step * grad[j] / k;
    res.t = project_onto(set, next);
    ++res.iterations;
    update_residual();
    if (res.residual <= epsilon) {
      res.converged = true;
      break;
    }
  }
  return res;
}

ErrorBoundAudit error_bound_audit_given_rstar(const SamplingMatrix& gamma, std::span<const double> v,
                                          const SetDescriptor& set, double epsilon, double theta,
                                          const RStarResult& rstar, std::size_t max_iters) {
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("error_bound_audit: theta must lie in (0, 1)");
  const Vector y = multiply(gamma, v);
  const ApproxResult rec = approx_reconstruct(gamma, y, set, epsilon, max_iters);
  ErrorBoundAudit audit;
  Vector diff(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) diff[i] = rec.t[i] - v[i];
  audit.observed_error = norm2(diff);
  audit.residual = rec.residual;
  audit.r_star = rstar.value;
  audit.r_star_crossed = rstar.crossed;
  audit.bound_value = rec.residual / (1.0 - theta) + rstar.value;
  audit.satisfied = audit.observed_error <= audit.bound_value;
  return audit;
}

ErrorBoundAudit error_bound_audit(const SamplingMatrix& gamma, std::span<const double> v, const SetDescriptor& set,
                              double epsilon, double theta, double alpha, const RStarOptions& rstar_options,
                              RngState& rng, std::size_t max_iters) {
  const RStarResult rs = r_star(theta, scaled(set, 2.0), gamma.rows(), alpha, rstar_options, rng);
  return error_bound_audit_given_rstar(gamma, v, set, epsilon, theta, rs, max_iters);
}

Vector random_l1_sphere_point(std::size_t n, RngState& rng) {
  Vector v(n);
  double total = 0.0;
  for (double& x : v) {
    x = -std::log(rng.next_open_uniform());
    total += x;
  }
  for (double& x : v) {
    x /= total;
    if (rng.next_u64() >> 63) x = -x;
  }
  return v;
}

SparseVector random_sign_sparse(std::size_t n, std::size_t m, RngState& rng) {
  if (m > n) throw std::invalid_argument("random_sign_sparse: m exceeds n");
  // Partial Fisher-Yates over the index set.
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
    std::swap(idx[i], idx[j]);
  }
  SparseVector z;
  z.n = n;
  z.support.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m));
  std::sort(z.support.begin(), z.support.end());
  for (std::size_t i = 0; i < m; ++i) z.values.push_back((rng.next_u64() >> 63) ? 1.0 : -1.0);
  return z;
}

}  // namespace sgrecon
