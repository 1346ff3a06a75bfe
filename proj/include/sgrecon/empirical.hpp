#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sgrecon/ensembles.hpp"
#include "sgrecon/geometry.hpp"
#include "sgrecon/linalg.hpp"
#include "sgrecon/rng.hpp"

namespace sgrecon {

/// Linear functionals f_x = <., x>. Under an isotropic measure E f_x^2 = |x|^2,
/// which is the value the processes below subtract.
struct FunctionalClass {
  std::vector<Vector> points;
  bool normalized = true;

  static FunctionalClass canonical_basis(std::size_t n);
  std::size_t dimension() const { return points.empty() ? 0 : points.front().size(); }
  /// Requires a nonempty class of equal-length points, unit length when normalized (1e-9).
  void validate() const;
};

/// Z_x = |Gamma x|^2 / k - |x|^2 and W_x = |Gamma x| / sqrt(k) for every class point.
struct ProcessReport {
  Vector z;
  Vector w;
  double sup_abs_z = 0.0;
  std::size_t argmax = 0;
  std::size_t k = 0;
};

ProcessReport process_eval(const FunctionalClass& cls, const SamplingMatrix& gamma);

struct ScalingRow {
  std::size_t k = 0;
  double mean_sup_z = 0.0;
  double std_err = 0.0;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  /// Least-squares slope of log(mean sup|Z|) against log k.
  double slope = 0.0;
  double slope_std_err = 0.0;
};

/// Monte Carlo mean of sup |Z_f| at each k. Trial t at grid index i draws its
/// matrix from rng.substream(i * trials + t).
ScalingReport sup_scaling_diag(const FunctionalClass& cls, const Ensemble& ensemble,
                               std::span<const std::size_t> k_grid, std::size_t trials,
                               const RngState& rng);

struct IsometryVerdict {
  bool holds = true;
  /// First support whose normalized Gram spectrum leaves [1 - theta, 1 + theta].
  std::vector<std::size_t> support;
  double eigenvalue = 0.0;
  std::size_t supports_checked = 0;
};

constexpr double kMaxAuditSupports = 1e6;

/// Checks (1 - theta)|x|^2 <= |Gamma x|^2 / k <= (1 + theta)|x|^2 over every
/// x in the sparse cap, exactly, via the extreme Gram eigenvalues of each
/// support of size m. Throws std::length_error above 10^6 supports.
IsometryVerdict isometry_audit(const SamplingMatrix& gamma, const SetDescriptor& cap, double theta);

}  // namespace sgrecon
