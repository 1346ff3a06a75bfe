#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sgrecon/linalg.hpp"
#include "sgrecon/rng.hpp"

namespace sgrecon {

struct L1Ball {
  double radius = 1.0;
};
/// radius * B_{p,infty}^n: vectors whose decreasing rearrangement obeys x*_i <= radius * i^{-1/p}.
struct WeakLpBall {
  double p = 0.5;
  double radius = 1.0;
};
struct EuclideanBall {
  double radius = 1.0;
};
/// Star hull of radius * U_m, with U_m the unit vectors of support at most m.
struct SparseCap {
  std::size_t m = 1;
  double radius = 1.0;
};
/// Star hull { lambda t : t in points, 0 <= lambda <= 1 }.
struct PointCloud {
  std::vector<Vector> points;
};

using Shape = std::variant<L1Ball, WeakLpBall, EuclideanBall, SparseCap, PointCloud>;

/// A star-shaped subset of R^n.
struct SetDescriptor {
  Shape shape;
  std::size_t n = 0;

  void validate() const;
};

SetDescriptor scaled(const SetDescriptor& set, double factor);
/// Largest Euclidean norm attained on the set.
double set_radius(const SetDescriptor& set);
std::string describe(const SetDescriptor& set);
/// Parses "l1", "l1:R", "l2", "l2:R", "weaklp:p", "sparse:m".
std::optional<SetDescriptor> parse_set(std::string_view spec, std::size_t n);

/// sup_{t in T} |<g, t>|, evaluated exactly for every shape.
double support_function(const SetDescriptor& set, std::span<const double> g);

/// sup over T intersected with the sphere of radius rho of |<g, t>|; zero when that intersection is empty.
double shell_support(const SetDescriptor& set, std::span<const double> g, double rho);

struct WidthEstimate {
  double value = 0.0;
  double std_err = 0.0;
  std::size_t num_samples = 0;
};

/// Monte Carlo estimate of the Gaussian mean width E sup_{t in T} |<g, t>|.
WidthEstimate gaussian_width(const SetDescriptor& set, std::size_t num_samples, RngState& rng);

/// sqrt(log(5^m * C(n, m))): the entropy bound on the width of conv U_m with unit constant.
double width_bound_um(std::size_t m, std::size_t n);

struct RStarResult {
  double value = 0.0;
  /// False when no grid point satisfies the fixed-point inequality; value is then the grid maximum.
  bool crossed = true;
  std::size_t grid_index = 0;
};

struct RStarOptions {
  double c_norm = 1.0;
  std::size_t num_samples = 256;
  std::size_t grid_points = 2048;
  double grid_min = 1e-6;
};

/// Smallest grid radius rho with rho >= c alpha^2 width(T_rho) / (theta sqrt k),
/// where T_rho is T on the sphere of radius rho and the width is estimated by
/// Monte Carlo. The same Gaussian draws are reused at every radius, which makes
/// width(T_rho)/rho exactly nonincreasing, so the first crossing is found by
/// bisection over the geometric grid [grid_min, set_radius(T)].
RStarResult r_star(double theta, const SetDescriptor& set, std::size_t k, double alpha,
                   const RStarOptions& options, RngState& rng);

struct L1Rate {};
struct WeakLpRate {
  double p = 0.5;
};
using RateKind = std::variant<L1Rate, WeakLpRate>;

/// Closed-form upper estimate of r* for B_1^n or B_{p,infty}^n with every
/// absolute constant set to `c` (default 1). Returns +infinity when
/// theta^2 k / alpha^4 exceeds c n (logarithm argument below 1).
double rstar_closed_form(double theta, std::size_t k, std::size_t n, double alpha, RateKind kind,
                         double c = 1.0);

/// Unit vector with at most m nonzero coordinates, stored sparsely.
struct SparseAtom {
  std::vector<std::size_t> indices;
  Vector values;
};

/// x = 2 * sum_j weights[j] * atoms[j], weights >= 0 summing to at most 1.
struct UmDecomposition {
  Vector weights;
  std::vector<SparseAtom> atoms;
};

struct UmCheck {
  std::size_t max_support = 0;
  double weight_sum = 0.0;
  double residual = 0.0;
  double max_atom_norm_error = 0.0;
};

/// Writes a unit vector x with ||x||_1 <= 2 sqrt(m) as a point of 2 conv U_m.
/// Coordinates are sorted by magnitude and cut into consecutive blocks of m,
/// each block normalized with weight |block| / 2. When the block weights sum
/// past 1 the optimal decomposition is used instead: the leading coordinates
/// are shared by every atom and the flat tail is split by systematic sampling
/// over the hypersimplex, giving total weight equal to half the m-support norm.
UmDecomposition decompose_into_um(std::span<const double> x, std::size_t m);

UmCheck verify_um(std::span<const double> x, const UmDecomposition& d);

}  // namespace sgrecon
