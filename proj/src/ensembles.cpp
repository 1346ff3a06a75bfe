#include "sgrecon/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sgrecon {

Ensemble Ensemble::make(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::Gaussian:
      return {kind, std::sqrt(8.0 / 3.0)};
    case EnsembleKind::Rademacher:
      return {kind, 1.0 / std::sqrt(std::log(2.0))};
    case EnsembleKind::BoundedUniform:
      // Uniform on [-sqrt 3, sqrt 3] is dominated by the Gaussian constant.
      return {kind, std::sqrt(8.0 / 3.0)};
  }
  throw std::invalid_argument("Ensemble::make: unknown kind");
}

std::string_view to_string(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::Gaussian:
      return "gaussian";
    case EnsembleKind::Rademacher:
      return "rademacher";
    case EnsembleKind::BoundedUniform:
      return "uniform";
  }
  return "unknown";
}

std::optional<EnsembleKind> parse_ensemble_kind(std::string_view name) {
  if (name == "gaussian") return EnsembleKind::Gaussian;
  if (name == "rademacher") return EnsembleKind::Rademacher;
  if (name == "uniform" || name == "bounded-uniform") return EnsembleKind::BoundedUniform;
  return std::nullopt;
}

double sample_coordinate(EnsembleKind kind, RngState& rng) {
  switch (kind) {
    case EnsembleKind::Gaussian:
      return rng.next_gaussian();
    case EnsembleKind::Rademacher:
      return (rng.next_u64() >> 63) ? 1.0 : -1.0;
    case EnsembleKind::BoundedUniform:
      return std::sqrt(3.0) * (2.0 * rng.next_uniform() - 1.0);
  }
  throw std::invalid_argument("sample_coordinate: unknown kind");
}

SamplingMatrix sample_matrix(const Ensemble& ensemble, std::size_t k, std::size_t n, RngState& rng) {
  if (k == 0 || n == 0) throw std::invalid_argument("sample_matrix: k and n must be positive");
  SamplingMatrix gamma(k, n);
  auto data = gamma.data();
  if (ensemble.kind == EnsembleKind::Gaussian) {
    rng.fill_gaussian(data);
  } else {
    for (double& v : data) v = sample_coordinate(ensemble.kind, rng);
  }
  return gamma;
}

std::vector<DirectionMoment> isotropy_check(const Ensemble& ensemble, std::size_t n,
                                            std::size_t num_samples,
                                            std::span<const Vector> directions, RngState& rng) {
  if (num_samples == 0) throw std::invalid_argument("isotropy_check: num_samples must be positive");
  for (const Vector& y : directions) {
    if (y.size() != n) throw std::invalid_argument("isotropy_check: direction has wrong dimension");
    if (std::abs(norm2(y) - 1.0) > 1e-9)
      throw std::invalid_argument("isotropy_check: direction is not a unit vector");
  }
  // Welford accumulation per direction over a shared stream of draws.
  std::vector<double> mean(directions.size(), 0.0), m2(directions.size(), 0.0);
  Vector x(n);
  for (std::size_t s = 0; s < num_samples; ++s) {
    if (ensemble.kind == EnsembleKind::Gaussian) {
      rng.fill_gaussian(x);
    } else {
      for (double& v : x) v = sample_coordinate(ensemble.kind, rng);
    }
    for (std::size_t d = 0; d < directions.size(); ++d) {
      const double p = dot(x, directions[d]);
      const double q = p * p;
      const double delta = q - mean[d];
      mean[d] += delta / static_cast<double>(s + 1);
      m2[d] += delta * (q - mean[d]);
    }
  }
  std::vector<DirectionMoment> out(directions.size());
  const double N = static_cast<double>(num_samples);
  for (std::size_t d = 0; d < directions.size(); ++d) {
    const double var = num_samples > 1 ? m2[d] / (N - 1.0) : 0.0;
    out[d] = {mean[d], std::sqrt(var / N)};
  }
  return out;
}

double psi2_estimate(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("psi2_estimate: empty sample");
  double max_abs = 0.0;
  for (double y : samples) max_abs = std::max(max_abs, std::abs(y));
  if (max_abs == 0.0) return 0.0;

  Vector terms(samples.size());
  auto excess = [&](double u) {
    const double inv = 1.0 / (u * u);
    for (std::size_t i = 0; i < samples.size(); ++i) terms[i] = std::exp(samples[i] * samples[i] * inv);
    return pairwise_sum(terms) / static_cast<double>(samples.size()) - 2.0;
  };

  double lo = max_abs / 10.0;
  double hi = 10.0 * max_abs;
  if (excess(hi) > 0.0) return std::numeric_limits<double>::infinity();
  if (excess(lo) <= 0.0) return lo;
  // mean(exp(Y^2/u^2)) is decreasing in u.
  for (int it = 0; it < 100 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (excess(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

}  // namespace sgrecon
