#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sgrecon/geometry.hpp"
#include "sgrecon/linalg.hpp"
#include "sgrecon/rng.hpp"

namespace sgrecon {

/// Vector with explicit sorted support; stored values are nonzero.
struct SparseVector {
  std::size_t n = 0;
  std::vector<std::size_t> support;
  Vector values;

  void validate() const;
  Vector dense() const;
  static SparseVector from_dense(std::span<const double> x);
};

enum class RecoveryOutcome { ExactSuccess, Failure };

struct RecoveryTrial {
  RecoveryOutcome outcome = RecoveryOutcome::Failure;
  double linf_error = 0.0;
  /// max_i |(Gamma t - y)_i| of the returned solution.
  double residual = 0.0;
  double wall_ms = 0.0;
  std::string diagnostic;
  Vector solution;
};

/// Success threshold on the l_inf error: 1e-6 * (1 + max |z_i|).
bool is_exact(double linf_error, const SparseVector& z);

/// Measures y = Gamma z and solves basis pursuit; LP failures become a
/// Failure outcome carrying the diagnostic.
RecoveryTrial exact_recover(const SamplingMatrix& gamma, const SparseVector& z);

struct ApproxResult {
  Vector t;
  /// ((1/k) sum_i (y_i - <X_i, t>)^2)^{1/2}
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// Objective (1/2k)|Gamma t - y|^2 per iterate, starting at the initial point; filled when requested.
  Vector objective_trace;
};

/// Projected gradient descent on (1/2k)|Gamma t - y|^2 over an L1Ball or
/// EuclideanBall, started at the projection of `start` (0 when empty) with step k / lambda_max(Gamma^T Gamma) from
/// 50 power iterations. Stops once the residual is at most epsilon.
ApproxResult approx_reconstruct(const SamplingMatrix& gamma, std::span<const double> y,
                                const SetDescriptor& set, double epsilon, std::size_t max_iters,
                                bool record_trace = false, std::span<const double> start = {});

struct ErrorBoundAudit {
  double observed_error = 0.0;
  double bound_value = 0.0;
  bool satisfied = false;
  double residual = 0.0;
  double r_star = 0.0;
  bool r_star_crossed = true;
};

/// observed |t - v| against residual / (1 - theta) + r*(theta, 2T), where t is
/// the approximate reconstruction of v. The set must be a symmetric convex body
/// (L1Ball or EuclideanBall), for which T - T lies in 2T.
ErrorBoundAudit error_bound_audit(const SamplingMatrix& gamma, std::span<const double> v, const SetDescriptor& set,
                              double epsilon, double theta, double alpha, const RStarOptions& rstar_options,
                              RngState& rng, std::size_t max_iters = 10000);

/// Same audit with r*(theta, 2T) supplied by the caller (it does not depend on Gamma).
ErrorBoundAudit error_bound_audit_given_rstar(const SamplingMatrix& gamma, std::span<const double> v,
                                          const SetDescriptor& set, double epsilon, double theta,
                                          const RStarResult& rstar, std::size_t max_iters = 10000);

/// Uniform point on the l1 unit sphere: exponential magnitudes, normalized, random signs.
Vector random_l1_sphere_point(std::size_t n, RngState& rng);

/// m distinct coordinates chosen uniformly, each set to a random sign.
SparseVector random_sign_sparse(std::size_t n, std::size_t m, RngState& rng);

}  // namespace sgrecon
