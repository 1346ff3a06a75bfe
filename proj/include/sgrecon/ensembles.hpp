#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sgrecon/linalg.hpp"
#include "sgrecon/rng.hpp"

namespace sgrecon {

enum class EnsembleKind { Gaussian, Rademacher, BoundedUniform };

/// An isotropic subgaussian product measure on R^n together with its psi_2 constant.
struct Ensemble {
  EnsembleKind kind = EnsembleKind::Gaussian;
  double alpha = 1.0;

  /// Built-in ensemble with its analytic psi_2 constant:
  /// Gaussian sqrt(8/3), Rademacher 1/sqrt(ln 2), BoundedUniform (uniform on
  /// [-sqrt 3, sqrt 3]) bounded above by the Gaussian value.
  static Ensemble make(EnsembleKind kind);
};

std::string_view to_string(EnsembleKind kind);
/// Accepts "gaussian", "rademacher", "uniform" (or "bounded-uniform").
std::optional<EnsembleKind> parse_ensemble_kind(std::string_view name);

/// One coordinate draw from the ensemble's marginal.
double sample_coordinate(EnsembleKind kind, RngState& rng);

/// k x n matrix whose rows are i.i.d. draws of X. Entries are generated in
/// row-major order from `rng`, so the result is a pure function of the inputs.
SamplingMatrix sample_matrix(const Ensemble& ensemble, std::size_t k, std::size_t n, RngState& rng);

struct DirectionMoment {
  double empirical_moment = 0.0;
  double std_err = 0.0;
};

/// Empirical E <X, y>^2 for each unit direction y, from `num_samples` draws of X.
/// Throws std::invalid_argument if a direction is not unit length (tolerance 1e-9).
std::vector<DirectionMoment> isotropy_check(const Ensemble& ensemble, std::size_t n,
                                            std::size_t num_samples,
                                            std::span<const Vector> directions, RngState& rng);

/// Empirical psi_2 norm: the root u of mean(exp(Y^2 / u^2)) = 2, located by
/// bisection on [max|Y| / 10, 10 max|Y|]. Returns 0 for all-zero data and
/// +infinity if the empirical mean still exceeds 2 at the upper bracket.
double psi2_estimate(std::span<const double> samples);

}  // namespace sgrecon
