#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "sgrecon/linalg.hpp"

namespace sgrecon {

/// minimize c^T x  subject to  A x = b,  G x <= h,  lower <= x <= upper.
///
/// `lower` / `upper` are either empty (every variable free) or hold one entry
/// per variable; use +-infinity for a missing side. An empty constraint
/// matrix must still carry the right column count (0 x n).
struct LinearProgram {
  Vector objective;
  Matrix eq_matrix;
  Vector eq_rhs;
  Matrix ineq_matrix;
  Vector ineq_rhs;
  Vector lower;
  Vector upper;

  std::size_t num_vars() const { return objective.size(); }

  /// Throws std::invalid_argument on inconsistent dimensions or non-finite coefficients.
  void validate() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

std::string_view to_string(LpStatus status);

struct LpOutcome {
  LpStatus status = LpStatus::Infeasible;
  std::optional<Vector> point;
  std::optional<double> objective_value;
  /// Lagrange multipliers of the original rows for Optimal outcomes, with the
  /// convention c = A^T y_eq + G^T y_ineq + (bound multipliers); y_ineq <= 0.
  Vector eq_duals;
  Vector ineq_duals;
  /// b^T y of the final phase-2 dual iterate, mapped back to the original problem.
  double dual_bound = 0.0;
  /// max_j (A^T y - c)_j over the standard-form columns; <= 0 for a dual-feasible y.
  double dual_infeasibility = 0.0;
  std::size_t pivots = 0;
};

/// Tolerance ladder of the simplex engine.
struct LpTolerances {
  double feasibility = 1e-8;
  double optimality = 1e-9;
  double pivot = 1e-9;
};

/// Dense two-phase primal simplex: Dantzig pricing, with Bland's rule during
/// degenerate stalls to rule out cycling. The tableau is rebuilt from the
/// original data every 50 pivots and before any optimal or unbounded verdict.
LpOutcome solve_lp(const LinearProgram& lp, const LpTolerances& tol = {});

/// Plain-text dump of an LP for failure triage.
std::string to_debug_string(const LinearProgram& lp);

/// min ||t||_1 subject to Gamma t = y, via t = u - v with u, v >= 0.
/// Throws std::runtime_error if y is not in the range of Gamma.
Vector basis_pursuit(const SamplingMatrix& gamma, std::span<const double> y);

}  // namespace sgrecon
