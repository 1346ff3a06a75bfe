#include "sgrecon/polytope.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "sgrecon/lp.hpp"
#include "sgrecon/parallel.hpp"
#include "sgrecon/stats.hpp"

namespace sgrecon {

void FaceQuery::validate(std::size_t n) const {
  if (size() == 0) throw std::invalid_argument("face query: empty vertex set");
  if (!symmetric && !i_minus.empty())
    throw std::invalid_argument("face query: negative indices require a symmetric query");
  std::vector<bool> seen(n, false);
  for (const auto* list : {&i_plus, &i_minus}) {
    for (std::size_t i : *list) {
      if (i >= n) throw std::invalid_argument("face query: index out of range");
      if (seen[i]) throw std::invalid_argument("face query: I+ and I- must be disjoint and duplicate-free");
      seen[i] = true;
    }
  }
}

std::string FaceQuery::to_string() const {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (std::size_t i : i_plus) {
    os << (first ? "" : ",") << '+' << i;
    first = false;
  }
  for (std::size_t i : i_minus) {
    os << (first ? "" : ",") << '-' << i;
    first = false;
  }
  os << '}';
  return os.str();
}

std::vector<bool> repeated_columns(const SamplingMatrix& gamma, bool symmetric) {
  const std::size_t k = gamma.rows(), n = gamma.cols();
  std::vector<bool> out(n, false);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      bool same = true, opposite = symmetric;
      for (std::size_t r = 0; r < k && (same || opposite); ++r) {
        same = same && gamma(r, a) == gamma(r, b);
        opposite = opposite && gamma(r, a) == -gamma(r, b);
      }
      if (same || opposite) out[a] = out[b] = true;
    }
  }
  return out;
}

namespace {

bool touches_repeated(const SamplingMatrix& gamma, const FaceQuery& q) {
  const auto rep = repeated_columns(gamma, q.symmetric);
  for (const auto* list : {&q.i_plus, &q.i_minus})
    for (std::size_t i : *list)
      if (rep[i]) return true;
  return false;
}

}  // namespace

FaceVerdict face_certificate(const SamplingMatrix& gamma, const FaceQuery& query) {
  const std::size_t k = gamma.rows(), n = gamma.cols();
  query.validate(n);

  std::vector<int> sign(n, 0);
  for (std::size_t i : query.i_plus) sign[i] = 1;
  for (std::size_t i : query.i_minus) sign[i] = -1;
  const std::size_t outside = n - query.size();
  const std::size_t per_col = query.symmetric ? 2 : 1;

  // Variables: w (k, free), s in [0, 1].
  const double inf = std::numeric_limits<double>::infinity();
  LinearProgram lp;
  lp.objective.assign(k + 1, 0.0);
  lp.objective[k] = -1.0;
  lp.eq_matrix = Matrix(query.size(), k + 1);
  lp.eq_rhs.assign(query.size(), 0.0);
  lp.ineq_matrix = Matrix(outside * per_col, k + 1);
  lp.ineq_rhs.assign(outside * per_col, 1.0);
  lp.lower.assign(k + 1, -inf);
  lp.upper.assign(k + 1, inf);
  lp.lower[k] = 0.0;
  lp.upper[k] = 1.0;

  std::size_t er = 0, ir = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (sign[j] != 0) {
      for (std::size_t r = 0; r < k; ++r) lp.eq_matrix(er, r) = gamma(r, j);
      lp.eq_rhs[er++] = sign[j];
      continue;
    }
    for (std::size_t r = 0; r < k; ++r) lp.ineq_matrix(ir, r) = gamma(r, j);
    lp.ineq_matrix(ir++, k) = 1.0;
    if (query.symmetric) {
      for (std::size_t r = 0; r < k; ++r) lp.ineq_matrix(ir, r) = -gamma(r, j);
      lp.ineq_matrix(ir++, k) = 1.0;
    }
  }

  FaceVerdict verdict;
  verdict.degenerate = touches_repeated(gamma, query);
  const LpOutcome out = solve_lp(lp);
  if (out.status != LpStatus::Optimal) return verdict;

  const Vector& x = *out.point;
  const double s = std::clamp(x[k], 0.0, 1.0);
  if (s <= kFaceMarginThreshold) {
    verdict.degenerate = true;
    return verdict;
  }
  verdict.is_face = true;
  verdict.certificate = Certificate{Vector(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(k)), s};
  return verdict;
}

bool face_oracle(const SamplingMatrix& gamma, const FaceQuery& query) {
  const std::size_t k = gamma.rows(), n = gamma.cols();
  query.validate(n);

  // Vertex list: columns, then negated columns (symmetric), then the origin.
  const std::size_t num_cols = query.symmetric ? 2 * n : n;
  const std::size_t num_vertices = num_cols + 1;
  std::vector<bool> in_query(num_vertices, false);
  for (std::size_t i : query.i_plus) in_query[i] = true;
  for (std::size_t i : query.i_minus) in_query[n + i] = true;

  auto vertex = [&](std::size_t j, std::size_t r) {
    if (j == num_cols) return 0.0;
    return j < n ? gamma(r, j) : -gamma(r, j - n);
  };

  Vector centroid(k, 0.0);
  for (std::size_t j = 0; j < num_cols; ++j)
    if (in_query[j])
      for (std::size_t r = 0; r < k; ++r) centroid[r] += vertex(j, r);
  for (double& c : centroid) c /= static_cast<double>(query.size());

  LinearProgram lp;
  lp.objective.assign(num_vertices, 0.0);
  for (std::size_t j = 0; j < num_vertices; ++j)
    if (!in_query[j]) lp.objective[j] = -1.0;
  lp.eq_matrix = Matrix(k + 1, num_vertices);
  lp.eq_rhs = centroid;
  lp.eq_rhs.push_back(1.0);
  for (std::size_t j = 0; j < num_vertices; ++j) {
    for (std::size_t r = 0; r < k; ++r) lp.eq_matrix(r, j) = vertex(j, r);
    lp.eq_matrix(k, j) = 1.0;
  }
  lp.ineq_matrix = Matrix(0, num_vertices);
  lp.lower.assign(num_vertices, 0.0);
  lp.upper.assign(num_vertices, std::numeric_limits<double>::infinity());

  const LpOutcome out = solve_lp(lp);
  if (out.status != LpStatus::Optimal)
    throw std::runtime_error("face_oracle: representation LP not optimal (" +
                             std::string(to_string(out.status)) + ")");
  return -*out.objective_value <= 1e-8;
}

double exhaustive_query_count(std::size_t n, std::size_t max_size, bool symmetric) {
  double total = 0.0;
  for (std::size_t s = 1; s <= max_size && s <= n; ++s)
    total += binomial(n, s) * (symmetric ? std::ldexp(1.0, static_cast<int>(s)) : 1.0);
  return total;
}

namespace {

void append_exhaustive(std::size_t n, std::size_t size, bool symmetric, std::vector<FaceQuery>& out) {
  std::vector<std::size_t> combo(size);
  for (std::size_t i = 0; i < size; ++i) combo[i] = i;
  do {
    const std::size_t patterns = symmetric ? (std::size_t{1} << size) : 1;
    for (std::size_t mask = 0; mask < patterns; ++mask) {
      FaceQuery q;
      q.symmetric = symmetric;
      for (std::size_t i = 0; i < size; ++i) ((mask >> i) & 1 ? q.i_minus : q.i_plus).push_back(combo[i]);
      out.push_back(std::move(q));
    }
  } while (next_combination(combo, n));
}

FaceQuery random_query(std::size_t n, std::size_t size, bool symmetric, RngState& rng) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = 0; i < size; ++i) std::swap(perm[i], perm[i + rng.next_below(n - i)]);
  std::sort(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(size));
  FaceQuery q;
  q.symmetric = symmetric;
  for (std::size_t i = 0; i < size; ++i) {
    const bool negative = symmetric && (rng.next_u64() & 1);
    (negative ? q.i_minus : q.i_plus).push_back(perm[i]);
  }
  return q;
}

}  // namespace

NeighborlyVerdict neighborly_scan(const SamplingMatrix& gamma, std::size_t m, bool symmetric,
                                  const ScanOptions& options) {
  const std::size_t n = gamma.cols();
  if (m == 0) throw std::invalid_argument("neighborly_scan: m must be positive");
  if (m > n) throw std::invalid_argument("neighborly_scan: m exceeds the number of columns");
  const std::size_t max_size = options.strict_lt ? m - 1 : m;

  std::vector<FaceQuery> queries;
  if (options.exhaustive) {
    const double count = exhaustive_query_count(n, max_size, symmetric);
    if (count > kMaxExhaustiveQueries)
      throw std::length_error("neighborly_scan: exhaustive scan needs " + std::to_string(count) +
                              " queries; use sampled mode");
    queries.reserve(static_cast<std::size_t>(count));
    for (std::size_t s = 1; s <= max_size; ++s) append_exhaustive(n, s, symmetric, queries);
  } else if (max_size > 0) {
    RngState rng = options.rng;
    queries.reserve(options.num_queries);
    for (std::size_t i = 0; i < options.num_queries; ++i) queries.push_back(random_query(n, max_size, symmetric, rng));
  }

  // Smallest failing index wins so the verdict does not depend on scheduling.
  std::atomic<std::size_t> first_failure{queries.size()};
  std::atomic<std::size_t> checked{0}, degenerate{0};
  parallel_for(queries.size(), options.threads, [&](std::size_t i) {
    if (i > first_failure.load()) return;
    const FaceVerdict v = face_certificate(gamma, queries[i]);
    checked.fetch_add(1);
    if (v.degenerate) degenerate.fetch_add(1);
    if (!v.is_face) {
      std::size_t cur = first_failure.load();
      while (i < cur && !first_failure.compare_exchange_weak(cur, i)) {
      }
    }
  });

  NeighborlyVerdict verdict;
  verdict.degenerate_queries = degenerate.load();
  if (first_failure.load() < queries.size()) {
    verdict.neighborly = false;
    verdict.counterexample = queries[first_failure.load()];
    // Report the scanned prefix, independent of how far other workers ran.
    verdict.queries_checked = first_failure.load() + 1;
  } else {
    verdict.queries_checked = checked.load();
  }
  return verdict;
}

}  // namespace sgrecon
