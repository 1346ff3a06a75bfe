#include "sgrecon/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sgrecon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kNone = static_cast<std::size_t>(-1);
constexpr std::size_t kMaxPivots = 200000;
constexpr std::size_t kDegenerateRunLimit = 50;
constexpr std::size_t kRefactorInterval = 50;
constexpr double kExpelPivot = 1e-7;

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// x_j = offset + pos_coef * std[pos] (+ neg_coef * std[neg] for free variables).
struct VarMap {
  double offset = 0.0;
  std::size_t pos = kNone;
  double pos_coef = 1.0;
  std::size_t neg = kNone;
};

// Standard form: min c^T p  s.t.  A p = b, b >= 0, p >= 0.
struct StandardForm {
  Matrix a;
  Vector b;
  Vector c;
  double objective_offset = 0.0;
  std::vector<double> row_sign;   // std row = sign * original row
  std::vector<std::size_t> slack; // slack column of each row or kNone
  std::vector<VarMap> vars;
  std::size_t num_eq = 0;
  std::size_t num_ineq = 0;
};

StandardForm to_standard_form(const LinearProgram& lp) {
  const std::size_t n = lp.num_vars();
  StandardForm sf;
  sf.vars.resize(n);
  std::size_t ncols = 0;
  std::vector<std::pair<std::size_t, double>> bound_rows;  // (std column, range)
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = lp.lower.empty() ? -kInf : lp.lower[j];
    const double hi = lp.upper.empty() ? kInf : lp.upper[j];
    VarMap& v = sf.vars[j];
    if (std::isfinite(lo)) {
      v.offset = lo;
      v.pos = ncols++;
      if (std::isfinite(hi)) bound_rows.emplace_back(v.pos, hi - lo);
    } else if (std::isfinite(hi)) {
      v.offset = hi;
      v.pos = ncols++;
      v.pos_coef = -1.0;
    } else {
      v.pos = ncols++;
      v.neg = ncols++;
    }
  }
  sf.num_eq = lp.eq_rhs.size();
  sf.num_ineq = lp.ineq_rhs.size();
  const std::size_t m = sf.num_eq + sf.num_ineq + bound_rows.size();
  const std::size_t num_slacks = sf.num_ineq + bound_rows.size();
  const std::size_t total = ncols + num_slacks;

  sf.a = Matrix(m, total);
  sf.b.assign(m, 0.0);
  sf.c.assign(total, 0.0);
  sf.row_sign.assign(m, 1.0);
  sf.slack.assign(m, kNone);

  auto put_row = [&](std::size_t r, std::span<const double> coeffs, double rhs) {
    double shifted = rhs;
    for (std::size_t j = 0; j < n; ++j) {
      const double aij = coeffs[j];
      if (aij == 0.0) continue;
      const VarMap& v = sf.vars[j];
      shifted -= aij * v.offset;
      sf.a(r, v.pos) += aij * v.pos_coef;
      if (v.neg != kNone) sf.a(r, v.neg) -= aij;
    }
    sf.b[r] = shifted;
  };

  std::size_t r = 0;
  for (std::size_t i = 0; i < sf.num_eq; ++i, ++r) put_row(r, lp.eq_matrix.row(i), lp.eq_rhs[i]);
  std::size_t next_slack = ncols;
  for (std::size_t i = 0; i < sf.num_ineq; ++i, ++r) {
    put_row(r, lp.ineq_matrix.row(i), lp.ineq_rhs[i]);
    sf.slack[r] = next_slack;
    sf.a(r, next_slack++) = 1.0;
  }
  for (const auto& [col, range] : bound_rows) {
    sf.a(r, col) = 1.0;
    sf.b[r] = range;
    sf.slack[r] = next_slack;
    sf.a(r, next_slack++) = 1.0;
    ++r;
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (sf.b[i] < 0.0) {
      sf.row_sign[i] = -1.0;
      sf.b[i] = -sf.b[i];
      for (double& v : sf.a.row(i)) v = -v;
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    const VarMap& v = sf.vars[j];
    const double cj = lp.objective[j];
    sf.objective_offset += cj * v.offset;
    sf.c[v.pos] += cj * v.pos_coef;
    if (v.neg != kNone) sf.c[v.neg] -= cj;
  }
  return sf;
}

// Dense tableau over the standard form plus artificial columns for the rows
// that have no usable slack. Artificial columns stay in the tableau after
// phase 1 (never re-entering) so the final duals can be read off them.
class Tableau {
 public:
  Tableau(const StandardForm& sf, const LpTolerances& tol) : sf_(sf), tol_(tol) {
    m_ = sf.a.rows();
    n_ = sf.a.cols();
    init_col_.assign(m_, kNone);
    for (std::size_t r = 0; r < m_; ++r) {
      if (sf.slack[r] != kNone && sf.row_sign[r] > 0.0) {
        init_col_[r] = sf.slack[r];
      } else {
        init_col_[r] = n_ + art_row_.size();
        art_row_.push_back(r);
      }
    }
    ncol_ = n_ + art_row_.size();
    width_ = ncol_ + 1;
    t_.assign(m_ * width_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      for (std::size_t j = 0; j < n_; ++j) at(r, j) = sf.a(r, j);
      at(r, ncol_) = sf.b[r];
    }
    for (std::size_t q = 0; q < art_row_.size(); ++q) at(art_row_[q], n_ + q) = 1.0;
    basis_ = init_col_;
  }

  bool is_artificial(std::size_t j) const { return j >= n_; }

  // Returns true when optimal, false when unbounded.
  bool run(const Vector& costs, bool allow_artificial) {
    price(costs);
    // Dantzig pricing; Bland's rule takes over after a run of degenerate
    // pivots and stays until the objective moves again.
    std::size_t degenerate_run = 0;
    for (;;) {
      if (since_refactor_ >= kRefactorInterval) refactor(costs);
      const bool bland = degenerate_run >= kDegenerateRunLimit;
      std::size_t enter = kNone;
      double most_negative = -tol_.optimality;
      for (std::size_t j = 0; j < ncol_; ++j) {
        if (!allow_artificial && is_artificial(j)) continue;
        if (d_[j] < most_negative) {
          enter = j;
          if (bland) break;
          most_negative = d_[j];
        }
      }
      if (enter == kNone) {
        // Confirm on a freshly rebuilt tableau; drift can fake optimality.
        if (since_refactor_ == 0 || !refactor(costs)) return true;
        continue;
      }
      std::size_t leave = kNone;
      double best = kInf;
      for (std::size_t r = 0; r < m_; ++r) {
        const double a = at(r, enter);
        if (a <= tol_.pivot) continue;
        const double ratio = std::max(at(r, ncol_), 0.0) / a;
        const double slack = 1e-12 * (1.0 + best);
        if (leave == kNone || ratio < best - slack) {
          best = ratio;
          leave = r;
        } else if (ratio <= best + slack && basis_[r] < basis_[leave]) {
          // Bland: among (near-)ties leave with the smallest variable index.
          best = std::min(best, ratio);
          leave = r;
        }
      }
      if (leave == kNone) {
        if (since_refactor_ == 0 || !refactor(costs)) return false;
        continue;
      }
      degenerate_run = best <= tol_.feasibility * 1e-3 ? degenerate_run + 1 : 0;
      pivot(leave, enter);
    }
  }

  double objective() const { return obj_; }

  // Pivots basic artificials out wherever a structural column allows it.
  void expel_artificials() {
    for (std::size_t r = 0; r < m_; ++r) {
      if (!is_artificial(basis_[r])) continue;
      std::size_t best = kNone;
      // Tiny pivots would wreck the tableau; such rows are numerically redundant.
      double best_abs = kExpelPivot;
      for (std::size_t j = 0; j < n_; ++j) {
        const double v = std::abs(at(r, j));
        if (v > best_abs) {
          best_abs = v;
          best = j;
        }
      }
      if (best != kNone) pivot(r, best);
    }
  }

  // Basic solution recomputed from the original data for accuracy.
  Vector primal() const {
    Matrix bm(m_, m_);
    for (std::size_t r = 0; r < m_; ++r) {
      const std::size_t j = basis_[r];
      if (j < n_) {
        for (std::size_t i = 0; i < m_; ++i) bm(i, r) = sf_.a(i, j);
      } else {
        bm(art_row_[j - n_], r) = 1.0;
      }
    }
    Vector xb;
    if (!solve_square(bm, sf_.b, xb)) {
      xb.resize(m_);
      for (std::size_t r = 0; r < m_; ++r) xb[r] = at(r, ncol_);
    }
    Vector x(n_, 0.0);
    for (std::size_t r = 0; r < m_; ++r)
      if (basis_[r] < n_) x[basis_[r]] = std::max(xb[r], 0.0);
    return x;
  }

  // y_r = c_init(r) - d_init(r); phase-2 costs of slacks and artificials are zero.
  Vector duals() const {
    Vector y(m_);
    for (std::size_t r = 0; r < m_; ++r) y[r] = -d_[init_col_[r]];
    return y;
  }

  std::size_t pivots() const { return pivots_; }

 private:
  double& at(std::size_t r, std::size_t j) { return t_[r * width_ + j]; }
  double at(std::size_t r, std::size_t j) const { return t_[r * width_ + j]; }

  // Rebuilds B^-1 [A | artificials | b] from the original data by Gauss-Jordan
  // elimination with partial pivoting and reprices. Returns false, leaving the
  // tableau untouched, when the basis matrix is numerically singular.
  bool refactor(const Vector& costs) {
    since_refactor_ = 0;
    const std::size_t w = m_ + width_;
    std::vector<double> aug(m_ * w, 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      const std::size_t j = basis_[r];
      if (j < n_) {
        for (std::size_t i = 0; i < m_; ++i) aug[i * w + r] = sf_.a(i, j);
      } else {
        aug[art_row_[j - n_] * w + r] = 1.0;
      }
    }
    // Right-hand block: the full original tableau.
    for (std::size_t i = 0; i < m_; ++i) {
      double* row = &aug[i * w + m_];
      for (std::size_t j = 0; j < n_; ++j) row[j] = sf_.a(i, j);
      row[ncol_] = sf_.b[i];
    }
    for (std::size_t q = 0; q < art_row_.size(); ++q) aug[art_row_[q] * w + m_ + n_ + q] = 1.0;
    for (std::size_t c = 0; c < m_; ++c) {
      std::size_t p = c;
      for (std::size_t r = c + 1; r < m_; ++r)
        if (std::abs(aug[r * w + c]) > std::abs(aug[p * w + c])) p = r;
      if (std::abs(aug[p * w + c]) < 1e-11) return false;
      if (p != c)
        for (std::size_t j = 0; j < w; ++j) std::swap(aug[p * w + j], aug[c * w + j]);
      const double inv = 1.0 / aug[c * w + c];
      for (std::size_t j = c; j < w; ++j) aug[c * w + j] *= inv;
      for (std::size_t r = 0; r < m_; ++r) {
        if (r == c) continue;
        const double f = aug[r * w + c];
        if (f == 0.0) continue;
        for (std::size_t j = c; j < w; ++j) aug[r * w + j] -= f * aug[c * w + j];
      }
    }
    // Row r of the result belongs to basis_[r] because column r of B is that variable.
    for (std::size_t r = 0; r < m_; ++r) {
      std::copy_n(&aug[r * w + m_], width_, &t_[r * width_]);
      at(r, basis_[r]) = 1.0;
    }
    price(costs);
    return true;
  }

  void price(const Vector& costs) {
    d_.assign(ncol_, 0.0);
    for (std::size_t j = 0; j < ncol_; ++j) d_[j] = costs[j];
    obj_ = 0.0;
    for (std::size_t r = 0; r < m_; ++r) {
      const double cb = costs[basis_[r]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j < ncol_; ++j) d_[j] -= cb * at(r, j);
      obj_ += cb * at(r, ncol_);
    }
  }

  void pivot(std::size_t pr, std::size_t pc) {
    if (++pivots_ > kMaxPivots) throw std::runtime_error("solve_lp: pivot limit exceeded");
    ++since_refactor_;
    double* prow = &t_[pr * width_];
    const double inv = 1.0 / prow[pc];
    for (std::size_t j = 0; j < width_; ++j) prow[j] *= inv;
    prow[pc] = 1.0;
    for (std::size_t r = 0; r < m_; ++r) {
      if (r == pr) continue;
      double* row = &t_[r * width_];
      const double f = row[pc];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) row[j] -= f * prow[j];
      row[pc] = 0.0;
    }
    const double f = d_[pc];
    if (f != 0.0) {
      for (std::size_t j = 0; j < ncol_; ++j) d_[j] -= f * prow[j];
      obj_ += f * prow[ncol_];
      d_[pc] = 0.0;
    }
    basis_[pr] = pc;
  }

  const StandardForm& sf_;
  LpTolerances tol_;
  std::size_t m_ = 0, n_ = 0, ncol_ = 0, width_ = 0;
  std::vector<double> t_;
  Vector d_;
  double obj_ = 0.0;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> init_col_;
  std::vector<std::size_t> art_row_;
  std::size_t pivots_ = 0;
  std::size_t since_refactor_ = 0;
};

}  // namespace

void LinearProgram::validate() const {
  const std::size_t n = num_vars();
  auto fail = [](const std::string& what) { throw std::invalid_argument("LinearProgram: " + what); };
  if (eq_matrix.rows() != eq_rhs.size()) fail("equality rows do not match rhs length");
  if (ineq_matrix.rows() != ineq_rhs.size()) fail("inequality rows do not match rhs length");
  if (eq_matrix.rows() > 0 && eq_matrix.cols() != n) fail("equality matrix has wrong column count");
  if (ineq_matrix.rows() > 0 && ineq_matrix.cols() != n) fail("inequality matrix has wrong column count");
  if (!lower.empty() && lower.size() != n) fail("lower bounds have wrong length");
  if (!upper.empty() && upper.size() != n) fail("upper bounds have wrong length");
  if (!all_finite(objective) || !all_finite(eq_matrix.data()) || !all_finite(eq_rhs) ||
      !all_finite(ineq_matrix.data()) || !all_finite(ineq_rhs))
    fail("non-finite coefficient");
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = lower.empty() ? -kInf : lower[j];
    const double hi = upper.empty() ? kInf : upper[j];
    if (std::isnan(lo) || std::isnan(hi) || lo == kInf || hi == -kInf) fail("invalid bound");
  }
}

std::string_view to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal:
      return "optimal";
    case LpStatus::Infeasible:
      return "infeasible";
    case LpStatus::Unbounded:
      return "unbounded";
  }
  return "unknown";
}

LpOutcome solve_lp(const LinearProgram& lp, const LpTolerances& tol) {
  lp.validate();
  const std::size_t n = lp.num_vars();
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = lp.lower.empty() ? -kInf : lp.lower[j];
    const double hi = lp.upper.empty() ? kInf : lp.upper[j];
    if (lo > hi) {
      LpOutcome out;
      out.status = LpStatus::Infeasible;
      return out;
    }
  }
  const StandardForm sf = to_standard_form(lp);
  Tableau tab(sf, tol);
  const std::size_t m = sf.a.rows();
  const std::size_t nstd = sf.a.cols();

  std::size_t num_art = 0;
  for (std::size_t r = 0; r < m; ++r)
    if (sf.slack[r] == kNone || sf.row_sign[r] < 0.0) ++num_art;
  const std::size_t ncol = nstd + num_art;

  LpOutcome out;
  if (num_art > 0) {
    Vector phase1(ncol, 0.0);
    std::fill(phase1.begin() + static_cast<std::ptrdiff_t>(nstd), phase1.end(), 1.0);
    tab.run(phase1, true);
    if (tab.objective() > tol.feasibility) {
      out.status = LpStatus::Infeasible;
      out.pivots = tab.pivots();
      return out;
    }
    tab.expel_artificials();
  }
  Vector phase2(ncol, 0.0);
  std::copy(sf.c.begin(), sf.c.end(), phase2.begin());
  const bool bounded = tab.run(phase2, false);
  out.pivots = tab.pivots();
  if (!bounded) {
    out.status = LpStatus::Unbounded;
    return out;
  }

  const Vector p = tab.primal();
  Vector x(n);
  for (std::size_t j = 0; j < n; ++j) {
    const VarMap& v = sf.vars[j];
    x[j] = v.offset + v.pos_coef * p[v.pos];
    if (v.neg != kNone) x[j] -= p[v.neg];
  }
  out.status = LpStatus::Optimal;
  out.objective_value = dot(lp.objective, x);
  out.point = std::move(x);

  const Vector y = tab.duals();
  out.dual_bound = dot(sf.b, y) + sf.objective_offset;
  double infeas = -kInf;
  for (std::size_t j = 0; j < nstd; ++j) {
    double s = -sf.c[j];
    for (std::size_t r = 0; r < m; ++r) s += sf.a(r, j) * y[r];
    infeas = std::max(infeas, s);
  }
  out.dual_infeasibility = nstd > 0 ? infeas : 0.0;
  out.eq_duals.resize(sf.num_eq);
  out.ineq_duals.resize(sf.num_ineq);
  for (std::size_t i = 0; i < sf.num_eq; ++i) out.eq_duals[i] = sf.row_sign[i] * y[i];
  for (std::size_t i = 0; i < sf.num_ineq; ++i)
    out.ineq_duals[i] = sf.row_sign[sf.num_eq + i] * y[sf.num_eq + i];
  return out;
}

std::string to_debug_string(const LinearProgram& lp) {
  std::ostringstream os;
  os.precision(17);
  const std::size_t n = lp.num_vars();
  os << "vars " << n << "\nminimize";
  for (double c : lp.objective) os << ' ' << c;
  os << '\n';
  auto dump_rows = [&](const char* tag, const Matrix& a, const Vector& rhs, const char* rel) {
    for (std::size_t i = 0; i < rhs.size(); ++i) {
      os << tag;
      for (std::size_t j = 0; j < n; ++j) os << ' ' << a(i, j);
      os << ' ' << rel << ' ' << rhs[i] << '\n';
    }
  };
  dump_rows("eq", lp.eq_matrix, lp.eq_rhs, "=");
  dump_rows("le", lp.ineq_matrix, lp.ineq_rhs, "<=");
  for (std::size_t j = 0; j < n; ++j) {
    const double lo = lp.lower.empty() ? -kInf : lp.lower[j];
    const double hi = lp.upper.empty() ? kInf : lp.upper[j];
    os << "bound " << j << ' ' << lo << ' ' << hi << '\n';
  }
  return os.str();
}

Vector basis_pursuit(const SamplingMatrix& gamma, std::span<const double> y) {
  const std::size_t k = gamma.rows();
  const std::size_t n = gamma.cols();
  if (y.size() != k) throw std::invalid_argument("basis_pursuit: measurement length mismatch");
  LinearProgram lp;
  lp.objective.assign(2 * n, 1.0);
  lp.eq_matrix = Matrix(k, 2 * n);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      lp.eq_matrix(i, j) = gamma(i, j);
      lp.eq_matrix(i, n + j) = -gamma(i, j);
    }
  }
  lp.eq_rhs.assign(y.begin(), y.end());
  lp.ineq_matrix = Matrix(0, 2 * n);
  lp.lower.assign(2 * n, 0.0);
  lp.upper.assign(2 * n, kInf);
  const LpOutcome res = solve_lp(lp);
  if (res.status != LpStatus::Optimal)
    throw std::runtime_error("basis_pursuit: LP " + std::string(to_string(res.status)));
  const Vector& uv = *res.point;
  Vector t(n);
  for (std::size_t j = 0; j < n; ++j) t[j] = uv[j] - uv[n + j];
  const Vector r = multiply(gamma, t);
  double err = 0.0;
  for (std::size_t i = 0; i < k; ++i) err = std::max(err, std::abs(r[i] - y[i]));
  if (err > 1e-7 * (1.0 + norm_inf(y)))
    throw std::runtime_error("basis_pursuit: measurement residual above tolerance");
  return t;
}

}  // namespace sgrecon
