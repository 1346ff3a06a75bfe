#include "sgrecon/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sgrecon/stats.hpp"

namespace sgrecon {

FunctionalClass FunctionalClass::canonical_basis(std::size_t n) {
  FunctionalClass cls;
  for (std::size_t j = 0; j < n; ++j) {
    Vector e(n, 0.0);
    e[j] = 1.0;
    cls.points.push_back(std::move(e));
  }
  return cls;
}

void FunctionalClass::validate() const {
  if (points.empty()) throw std::invalid_argument("FunctionalClass: empty class");
  const std::size_t n = points.front().size();
  for (const Vector& x : points) {
    if (x.size() != n) throw std::invalid_argument("FunctionalClass: points differ in dimension");
    if (normalized && std::abs(norm2(x) - 1.0) > 1e-9)
      throw std::invalid_argument("FunctionalClass: normalized class has a non-unit point");
  }
}

ProcessReport process_eval(const FunctionalClass& cls, const SamplingMatrix& gamma) {
  cls.validate();
  if (cls.dimension() != gamma.cols()) throw std::invalid_argument("process_eval: dimension mismatch");
  const double k = static_cast<double>(gamma.rows());
  ProcessReport rep;
  rep.k = gamma.rows();
  rep.z.resize(cls.points.size());
  rep.w.resize(cls.points.size());
  for (std::size_t i = 0; i < cls.points.size(); ++i) {
    const Vector& x = cls.points[i];
    const Vector gx = multiply(gamma, x);
    const double sq = dot(gx, gx) / k;
    rep.w[i] = std::sqrt(sq);
    rep.z[i] = sq - dot(x, x);
    if (std::abs(rep.z[i]) > rep.sup_abs_z || i == 0) {
      rep.sup_abs_z = std::abs(rep.z[i]);
      rep.argmax = i;
    }
  }
  return rep;
}

ScalingReport sup_scaling_diag(const FunctionalClass& cls, const Ensemble& ensemble,
                               std::span<const std::size_t> k_grid, std::size_t trials,
                               const RngState& rng) {
  cls.validate();
  if (k_grid.empty()) throw std::invalid_argument("sup_scaling_diag: empty k grid");
  if (trials == 0) throw std::invalid_argument("sup_scaling_diag: trials must be positive");
  for (std::size_t i = 0; i < k_grid.size(); ++i) {
    if (k_grid[i] < 4) throw std::invalid_argument("sup_scaling_diag: k must be at least 4");
    if (i > 0 && k_grid[i] <= k_grid[i - 1])
      throw std::invalid_argument("sup_scaling_diag: k grid must be strictly increasing");
  }
  const std::size_t n = cls.dimension();
  ScalingReport rep;
  Vector logk, logm;
  for (std::size_t gi = 0; gi < k_grid.size(); ++gi) {
    Vector sups(trials);
    for (std::size_t t = 0; t < trials; ++t) {
      RngState stream = rng.substream(gi * trials + t);
      const SamplingMatrix gamma = sample_matrix(ensemble, k_grid[gi], n, stream);
      sups[t] = process_eval(cls, gamma).sup_abs_z;
    }
    ScalingRow row{k_grid[gi], mean(sups), sample_std(sups) / std::sqrt(static_cast<double>(trials))};
    rep.rows.push_back(row);
    logk.push_back(std::log(static_cast<double>(row.k)));
    logm.push_back(std::log(row.mean_sup_z));
  }
  if (rep.rows.size() >= 2) {
    const LineFit fit = fit_line(logk, logm);
    rep.slope = fit.slope;
    rep.slope_std_err = fit.slope_std_err;
  }
  return rep;
}

IsometryVerdict isometry_audit(const SamplingMatrix& gamma, const SetDescriptor& cap, double theta) {
  const auto* sc = std::get_if<SparseCap>(&cap.shape);
  if (sc == nullptr) throw std::invalid_argument("isometry_audit: set must be a sparse cap");
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("isometry_audit: theta must lie in (0, 1)");
  cap.validate();
  const std::size_t n = gamma.cols();
  const std::size_t m = sc->m;
  if (cap.n != n) throw std::invalid_argument("isometry_audit: dimension mismatch");
  if (m > gamma.rows()) throw std::invalid_argument("isometry_audit: m exceeds k");
  if (binomial(n, m) > kMaxAuditSupports) throw std::length_error("isometry_audit: too many supports to enumerate");

  // Normalized Gram matrix of all columns, shared by every support.
  std::vector<Vector> cols(n);
  for (std::size_t j = 0; j < n; ++j) cols[j] = gamma.column(j);
  const double inv_k = 1.0 / static_cast<double>(gamma.rows());
  Matrix gram(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) gram(a, b) = gram(b, a) = dot(cols[a], cols[b]) * inv_k;

  IsometryVerdict verdict;
  std::vector<std::size_t> combo(m);
  for (std::size_t i = 0; i < m; ++i) combo[i] = i;
  do {
    Matrix sub(m, m);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) sub(a, b) = gram(combo[a], combo[b]);
    const Vector eig = symmetric_eigenvalues(std::move(sub));
    ++verdict.supports_checked;
    if (eig.front() < 1.0 - theta || eig.back() > 1.0 + theta) {
      verdict.holds = false;
      verdict.support = combo;
      verdict.eigenvalue = eig.front() < 1.0 - theta ? eig.front() : eig.back();
      return verdict;
    }
  } while (next_combination(combo, n));
  return verdict;
}

}  // namespace sgrecon
