#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sgrecon/linalg.hpp"
#include "sgrecon/rng.hpp"

namespace sgrecon {

/// Signed vertex subset {v_i : i in I+} u {-v_i : i in I-} of the polytope
/// spanned by the columns v_i of Gamma. Non-symmetric queries address
/// K+ = conv(v_1..v_n) and carry no negative indices.
struct FaceQuery {
  std::vector<std::size_t> i_plus;
  std::vector<std::size_t> i_minus;
  bool symmetric = false;

  std::size_t size() const { return i_plus.size() + i_minus.size(); }
  void validate(std::size_t n) const;
  std::string to_string() const;
};

/// Dual functional w with <w, Gamma e_i> = +-1 on the query.
struct Certificate {
  Vector w;
  /// Optimal margin s of the certificate LP, capped at 1: every column j outside
  /// the query has <w, v_j> <= 1 - s (|<w, v_j>| <= 1 - s for symmetric queries).
  double margin = 0.0;
};

struct FaceVerdict {
  bool is_face = false;
  std::optional<Certificate> certificate;
  /// Query touches a repeated column (or an opposite pair in symmetric mode),
  /// or the certificate LP is feasible only with zero margin.
  bool degenerate = false;
};

constexpr double kFaceMarginThreshold = 1e-7;

/// Maximizes the margin s subject to <w, v_i> = 1 (i in I+), = -1 (i in I-),
/// <w, v_j> <= 1 - s and, for symmetric queries, -<w, v_j> <= 1 - s for every
/// other column, 0 <= s <= 1. The query is a face iff the optimum exceeds 1e-7.
/// In the non-symmetric case this certifies a face of conv({0}, v_1..v_n) that
/// avoids the origin, which is the face notion tied to l1 recovery; it agrees
/// with K+ whenever the origin is interior to K+.
FaceVerdict face_certificate(const SamplingMatrix& gamma, const FaceQuery& query);

/// Independent primal check. Let p be the centroid of the signed query
/// vertices and U the vertex list (columns, their negatives when symmetric, and
/// the origin). The query is a face iff the largest total weight that any
/// convex representation of p over U puts outside the query is at most 1e-8.
bool face_oracle(const SamplingMatrix& gamma, const FaceQuery& query);

/// Columns that coincide with another column, or with the negative of one when
/// `symmetric` is set.
std::vector<bool> repeated_columns(const SamplingMatrix& gamma, bool symmetric);

struct ScanOptions {
  /// Exhaustive enumeration over all query sizes when true; otherwise
  /// `num_queries` uniformly drawn queries of the largest size.
  bool exhaustive = true;
  std::size_t num_queries = 0;
  /// Check sizes < m instead of <= m.
  bool strict_lt = false;
  std::size_t threads = 1;
  RngState rng;
};

struct NeighborlyVerdict {
  bool neighborly = true;
  std::optional<FaceQuery> counterexample;
  std::size_t queries_checked = 0;
  std::size_t degenerate_queries = 0;
};

constexpr double kMaxExhaustiveQueries = 1e6;

/// Number of queries an exhaustive scan visits.
double exhaustive_query_count(std::size_t n, std::size_t max_size, bool symmetric);

/// Checks that every query of size 1..m (1..m-1 with strict_lt) is a face;
/// reports the first failing query in enumeration order. Throws
/// std::length_error when an exhaustive scan would exceed 10^6 queries.
NeighborlyVerdict neighborly_scan(const SamplingMatrix& gamma, std::size_t m, bool symmetric,
                                  const ScanOptions& options);

}  // namespace sgrecon
