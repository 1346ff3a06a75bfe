#include "sgrecon/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace sgrecon {

namespace {

constexpr double kRelTol = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// |g| sorted in decreasing order with prefix sums of values and squares;
// prefix[j] covers the first j entries.
struct SortedMagnitudes {
  Vector a;
  Vector s1;
  Vector s2;

  explicit SortedMagnitudes(std::span<const double> g) : a(g.size()), s1(g.size() + 1), s2(g.size() + 1) {
    std::transform(g.begin(), g.end(), a.begin(), [](double v) { return std::abs(v); });
    std::sort(a.begin(), a.end(), std::greater<>());
    for (std::size_t i = 0; i < a.size(); ++i) {
      s1[i + 1] = s1[i] + a[i];
      s2[i + 1] = s2[i] + a[i] * a[i];
    }
  }
};

double weak_lp_profile(std::size_t i, double p) {
  return std::pow(static_cast<double>(i + 1), -1.0 / p);
}

double weak_lp_norm2(std::size_t n, double p) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double b = weak_lp_profile(i, p);
    s += b * b;
  }
  return std::sqrt(s);
}

// sup <a, t> over ||t||_1 <= r, |t|_2 <= rho, by minimizing the dual
// f(tau) = r tau + rho |soft_threshold(a, tau)|_2 (convex in tau) interval by interval.
double l1_shell(const SortedMagnitudes& sm, double r, double rho) {
  const auto& a = sm.a;
  const std::size_t n = a.size();
  if (n == 0 || a[0] == 0.0) return 0.0;
  if (rho > r * (1.0 + kRelTol)) return 0.0;
  if (rho >= r) return r * a[0];
  double best = r * a[0];
  for (std::size_t j = 1; j <= n; ++j) {
    const double hi = a[j - 1];
    const double lo = j < n ? a[j] : 0.0;
    const double jd = static_cast<double>(j);
    const double S1 = sm.s1[j];
    const double S2 = sm.s2[j];
    const double denom = rho * rho - r * r / jd;
    double tau = lo;
    if (denom > 0.0) {
      const double var = std::max(S2 - S1 * S1 / jd, 0.0);
      const double d = r * std::sqrt(var / denom);
      tau = (S1 - d) / jd;
    }
    tau = std::clamp(tau, lo, hi);
    const double q = std::max(S2 - 2.0 * tau * S1 + jd * tau * tau, 0.0);
    best = std::min(best, r * tau + rho * std::sqrt(q));
  }
  return best;
}

// sup <a, t> over 0 <= t_i <= R b_i (b_i = i^{-1/p}), |t|_2 <= rho, with a sorted
// decreasingly. The maximizer is t_i = min(R b_i, lambda a_i).
double weak_lp_shell(const SortedMagnitudes& sm, double p, double radius, double rho) {
  const auto& a = sm.a;
  const std::size_t n = a.size();
  Vector b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = radius * weak_lp_profile(i, p);
  const double full = radius * weak_lp_norm2(n, p);
  if (rho > full * (1.0 + kRelTol)) return 0.0;
  if (rho >= full) return dot(a, b);

  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (a[i] > 0.0) order.push_back(i);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return b[x] / a[x] < b[y] / a[y]; });
  double capped_b2 = 0.0, capped_ab = 0.0;
  double free_a2 = 0.0;
  for (std::size_t i : order) free_a2 += a[i] * a[i];
  for (std::size_t c = 0; c < order.size(); ++c) {
    const std::size_t i = order[c];
    const double next_ratio = b[i] / a[i];
    const double lambda = std::sqrt(std::max(rho * rho - capped_b2, 0.0) / free_a2);
    if (lambda <= next_ratio) return capped_ab + lambda * free_a2;
    capped_b2 += b[i] * b[i];
    capped_ab += a[i] * b[i];
    free_a2 -= a[i] * a[i];
    if (free_a2 <= 0.0) break;
  }
  return capped_ab;
}

double top_m_norm(const SortedMagnitudes& sm, std::size_t m) {
  return std::sqrt(sm.s2[std::min(m, sm.a.size())]);
}

double shell_prepared(const SetDescriptor& set, std::span<const double> g, const SortedMagnitudes& sm,
                      double rho) {
  return std::visit(
      Overloaded{
          [&](const L1Ball& s) { return l1_shell(sm, s.radius, rho); },
          [&](const WeakLpBall& s) { return weak_lp_shell(sm, s.p, s.radius, rho); },
          [&](const EuclideanBall& s) {
            return rho <= s.radius * (1.0 + kRelTol) ? rho * std::sqrt(sm.s2.back()) : 0.0;
          },
          [&](const SparseCap& s) {
            return rho <= s.radius * (1.0 + kRelTol) ? rho * top_m_norm(sm, s.m) : 0.0;
          },
          [&](const PointCloud& s) {
            double best = 0.0;
            for (const Vector& t : s.points) {
              const double nt = norm2(t);
              if (nt == 0.0 || nt < rho * (1.0 - kRelTol)) continue;
              best = std::max(best, rho * std::abs(dot(g, t)) / nt);
            }
            return best;
          },
      },
      set.shape);
}

double support_prepared(const SetDescriptor& set, std::span<const double> g, const SortedMagnitudes& sm) {
  return std::visit(
      Overloaded{
          [&](const L1Ball& s) { return sm.a.empty() ? 0.0 : s.radius * sm.a[0]; },
          [&](const WeakLpBall& s) {
            double v = 0.0;
            for (std::size_t i = 0; i < sm.a.size(); ++i) v += weak_lp_profile(i, s.p) * sm.a[i];
            return s.radius * v;
          },
          [&](const EuclideanBall& s) { return s.radius * std::sqrt(sm.s2.back()); },
          [&](const SparseCap& s) { return s.radius * top_m_norm(sm, s.m); },
          [&](const PointCloud& s) {
            double best = 0.0;
            for (const Vector& t : s.points) best = std::max(best, std::abs(dot(g, t)));
            return best;
          },
      },
      set.shape);
}

void check_dim(const SetDescriptor& set, std::span<const double> g, const char* what) {
  if (g.size() != set.n) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

}  // namespace

void SetDescriptor::validate() const {
  if (n == 0) throw std::invalid_argument("SetDescriptor: ambient dimension must be positive");
  std::visit(Overloaded{
                 [](const L1Ball& s) {
                   if (!(s.radius > 0.0)) throw std::invalid_argument("L1Ball: radius must be positive");
                 },
                 [](const WeakLpBall& s) {
                   if (!(s.p > 0.0 && s.p < 1.0)) throw std::invalid_argument("WeakLpBall: p must lie in (0, 1)");
                   if (!(s.radius > 0.0)) throw std::invalid_argument("WeakLpBall: radius must be positive");
                 },
                 [](const EuclideanBall& s) {
                   if (!(s.radius > 0.0)) throw std::invalid_argument("EuclideanBall: radius must be positive");
                 },
                 [&](const SparseCap& s) {
                   if (s.m == 0 || s.m > n) throw std::invalid_argument("SparseCap: m must lie in [1, n]");
                   if (!(s.radius > 0.0)) throw std::invalid_argument("SparseCap: radius must be positive");
                 },
                 [&](const PointCloud& s) {
                   if (s.points.empty()) throw std::invalid_argument("PointCloud: no points");
                   for (const Vector& t : s.points)
                     if (t.size() != n) throw std::invalid_argument("PointCloud: point has wrong dimension");
                 },
             },
             shape);
}

SetDescriptor scaled(const SetDescriptor& set, double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("scaled: factor must be positive");
  SetDescriptor out = set;
  std::visit(Overloaded{
                 [&](L1Ball& s) { s.radius *= factor; },
                 [&](WeakLpBall& s) { s.radius *= factor; },
                 [&](EuclideanBall& s) { s.radius *= factor; },
                 [&](SparseCap& s) { s.radius *= factor; },
                 [&](PointCloud& s) {
                   for (Vector& t : s.points)
                     for (double& v : t) v *= factor;
                 },
             },
             out.shape);
  return out;
}

double set_radius(const SetDescriptor& set) {
  return std::visit(Overloaded{
                        [](const L1Ball& s) { return s.radius; },
                        [&](const WeakLpBall& s) { return s.radius * weak_lp_norm2(set.n, s.p); },
                        [](const EuclideanBall& s) { return s.radius; },
                        [](const SparseCap& s) { return s.radius; },
                        [](const PointCloud& s) {
                          double r = 0.0;
                          for (const Vector& t : s.points) r = std::max(r, norm2(t));
                          return r;
                        },
                    },
                    set.shape);
}

std::string describe(const SetDescriptor& set) {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const L1Ball& s) { os << "l1:" << s.radius; },
                 [&](const WeakLpBall& s) { os << "weaklp:" << s.p << "@" << s.radius; },
                 [&](const EuclideanBall& s) { os << "l2:" << s.radius; },
                 [&](const SparseCap& s) { os << "sparse:" << s.m << "@" << s.radius; },
                 [&](const PointCloud& s) { os << "cloud:" << s.points.size(); },
             },
             set.shape);
  os << "/n=" << set.n;
  return os.str();
}

std::optional<SetDescriptor> parse_set(std::string_view spec, std::size_t n) {
  const auto colon = spec.find(':');
  const std::string_view name = spec.substr(0, colon);
  const std::string arg = colon == std::string_view::npos ? "" : std::string(spec.substr(colon + 1));
  auto number = [&](double fallback) -> std::optional<double> {
    if (arg.empty()) return fallback;
    try {
      std::size_t used = 0;
      const double v = std::stod(arg, &used);
      if (used != arg.size()) return std::nullopt;
      return v;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };
  SetDescriptor set;
  set.n = n;
  if (name == "l1") {
    const auto r = number(1.0);
    if (!r) return std::nullopt;
    set.shape = L1Ball{*r};
  } else if (name == "l2") {
    const auto r = number(1.0);
    if (!r) return std::nullopt;
    set.shape = EuclideanBall{*r};
  } else if (name == "weaklp") {
    const auto p = number(std::numeric_limits<double>::quiet_NaN());
    if (!p || std::isnan(*p)) return std::nullopt;
    set.shape = WeakLpBall{*p, 1.0};
  } else if (name == "sparse") {
    const auto m = number(std::numeric_limits<double>::quiet_NaN());
    if (!m || !(*m >= 1.0) || std::floor(*m) != *m) return std::nullopt;
    set.shape = SparseCap{static_cast<std::size_t>(*m), 1.0};
  } else {
    return std::nullopt;
  }
  try {
    set.validate();
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
  return set;
}

double support_function(const SetDescriptor& set, std::span<const double> g) {
  check_dim(set, g, "support_function");
  return support_prepared(set, g, SortedMagnitudes(g));
}

double shell_support(const SetDescriptor& set, std::span<const double> g, double rho) {
  check_dim(set, g, "shell_support");
  if (!(rho >= 0.0)) throw std::invalid_argument("shell_support: rho must be nonnegative");
  return shell_prepared(set, g, SortedMagnitudes(g), rho);
}

WidthEstimate gaussian_width(const SetDescriptor& set, std::size_t num_samples, RngState& rng) {
  if (num_samples < 2) throw std::invalid_argument("gaussian_width: need at least two samples");
  set.validate();
  Vector g(set.n);
  double mean = 0.0, m2 = 0.0;
  for (std::size_t s = 0; s < num_samples; ++s) {
    rng.fill_gaussian(g);
    const double v = support_prepared(set, g, SortedMagnitudes(g));
    const double delta = v - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (v - mean);
  }
  const double N = static_cast<double>(num_samples);
  return {mean, std::sqrt(m2 / (N - 1.0) / N), num_samples};
}

double width_bound_um(std::size_t m, std::size_t n) {
  if (m == 0 || m > n) throw std::invalid_argument("width_bound_um: need 1 <= m <= n");
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  const double log_binom = std::lgamma(nd + 1.0) - std::lgamma(md + 1.0) - std::lgamma(nd - md + 1.0);
  return std::sqrt(md * std::log(5.0) + log_binom);
}

RStarResult r_star(double theta, const SetDescriptor& set, std::size_t k, double alpha,
                   const RStarOptions& options, RngState& rng) {
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("r_star: theta must lie in (0, 1)");
  if (k == 0) throw std::invalid_argument("r_star: k must be positive");
  if (!(alpha >= 1.0)) throw std::invalid_argument("r_star: alpha must be at least 1");
  if (!(options.c_norm > 0.0)) throw std::invalid_argument("r_star: c_norm must be positive");
  if (options.num_samples == 0 || options.grid_points == 0)
    throw std::invalid_argument("r_star: sample and grid counts must be positive");
  set.validate();

  std::vector<Vector> draws(options.num_samples, Vector(set.n));
  std::vector<SortedMagnitudes> prepared;
  prepared.reserve(options.num_samples);
  for (Vector& g : draws) {
    rng.fill_gaussian(g);
    prepared.emplace_back(g);
  }

  const double rho_max = set_radius(set);
  const double rho_min = std::min(options.grid_min, rho_max);
  const std::size_t G = options.grid_points;
  auto grid = [&](std::size_t i) {
    if (G == 1 || i + 1 == G) return rho_max;
    if (i == 0) return rho_min;
    return rho_min * std::pow(rho_max / rho_min, static_cast<double>(i) / static_cast<double>(G - 1));
  };
  const double threshold = theta * std::sqrt(static_cast<double>(k)) / (options.c_norm * alpha * alpha);
  auto satisfied = [&](std::size_t i) {
    const double rho = grid(i);
    double sum = 0.0;
    for (std::size_t s = 0; s < draws.size(); ++s) sum += shell_prepared(set, draws[s], prepared[s], rho);
    const double width = sum / static_cast<double>(draws.size());
    return width <= threshold * rho;
  };

  if (satisfied(0)) return {grid(0), true, 0};
  if (!satisfied(G - 1)) return {grid(G - 1), false, G - 1};
  std::size_t lo = 0, hi = G - 1;  // !satisfied(lo), satisfied(hi)
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (satisfied(mid))
      hi = mid;
    else
      lo = mid;
  }
  return {grid(hi), true, hi};
}

double rstar_closed_form(double theta, std::size_t k, std::size_t n, double alpha, RateKind kind, double c) {
  if (!(theta > 0.0 && theta < 1.0 + kRelTol)) throw std::invalid_argument("rstar_closed_form: theta out of range");
  if (k == 0 || n == 0) throw std::invalid_argument("rstar_closed_form: k and n must be positive");
  double exponent = 0.5;
  double factor = 1.0;
  if (const auto* w = std::get_if<WeakLpRate>(&kind)) {
    if (!(w->p > 0.0 && w->p < 1.0)) throw std::invalid_argument("rstar_closed_form: p must lie in (0, 1)");
    exponent = 1.0 / w->p - 0.5;
    factor = 1.0 / (1.0 / w->p - 1.0);
  }
  const double a4 = std::pow(alpha, 4);
  const double effective_k = theta * theta * static_cast<double>(k) / a4;
  const double log_arg = c * static_cast<double>(n) / effective_k;
  if (log_arg < 1.0) return std::numeric_limits<double>::infinity();
  return c * factor * std::pow(std::log(log_arg) / effective_k, exponent);
}

UmDecomposition decompose_into_um(std::span<const double> x, std::size_t m) {
  if (m == 0) throw std::invalid_argument("decompose_into_um: m must be positive");
  if (std::abs(norm2(x) - 1.0) > 1e-9) throw std::invalid_argument("decompose_into_um: x is not a unit vector");
  if (norm1(x) > 2.0 * std::sqrt(static_cast<double>(m)) * (1.0 + kRelTol))
    throw std::invalid_argument("decompose_into_um: ||x||_1 exceeds 2 sqrt(m)");

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != 0.0) order.push_back(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(x[a]) > std::abs(x[b]); });

  UmDecomposition blocks;
  double total = 0.0;
  for (std::size_t start = 0; start < order.size(); start += m) {
    const std::size_t stop = std::min(start + m, order.size());
    SparseAtom atom;
    atom.indices.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                        order.begin() + static_cast<std::ptrdiff_t>(stop));
    std::sort(atom.indices.begin(), atom.indices.end());
    double sq = 0.0;
    for (std::size_t i : atom.indices) sq += x[i] * x[i];
    const double nb = std::sqrt(sq);
    for (std::size_t i : atom.indices) atom.values.push_back(x[i] / nb);
    blocks.atoms.push_back(std::move(atom));
    blocks.weights.push_back(nb / 2.0);
    total += nb / 2.0;
  }
  if (total <= 1.0 + kRelTol) return blocks;

  // Optimal decomposition. With a = |x| sorted decreasingly, pick r in [0, m) so
  // that a[j-1] > c >= a[j] for j = m - r - 1 and c = (sum_{i >= j} a_i) / (r + 1).
  const std::size_t nz = order.size();
  Vector a(nz);
  for (std::size_t i = 0; i < nz; ++i) a[i] = std::abs(x[order[i]]);
  std::size_t head = 0;
  double level = 0.0;
  double best_violation = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t j = m - r - 1;
    double tail = 0.0;
    for (std::size_t i = j; i < nz; ++i) tail += a[i];
    const double c = tail / static_cast<double>(r + 1);
    const double upper_gap = j == 0 ? 0.0 : std::max(c - a[j - 1], 0.0);
    const double lower_gap = std::max(a[j] - c, 0.0);
    const double violation = upper_gap + lower_gap;
    if (violation < best_violation) {
      best_violation = violation;
      head = j;
      level = c;
    }
    if (violation == 0.0) break;
  }

  // Systematic sampling of y = a_tail / level (entries in [0,1], sum r + 1)
  // over the hypersimplex: offsets u in [0,1) select the tail coordinates whose
  // cumulative interval contains u + integer.
  const std::size_t tail_len = nz - head;
  Vector cum(tail_len + 1, 0.0);
  for (std::size_t i = 0; i < tail_len; ++i) cum[i + 1] = cum[i] + std::min(a[head + i] / level, 1.0);
  // The selection weights sum to m - head; pin that total exactly and snap
  // rounding noise so no offset picks up an extra coordinate.
  const double target = static_cast<double>(m - head);
  const double scale = target / cum[tail_len];
  for (double& cv : cum) {
    cv *= scale;
    const double nearest = std::round(cv);
    if (std::abs(cv - nearest) <= 1e-12 * (1.0 + target)) cv = nearest;
  }
  cum[tail_len] = target;
  Vector cuts{0.0, 1.0};
  for (double cv : cum) cuts.push_back(cv - std::floor(cv));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  UmDecomposition out;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const double width = cuts[p + 1] - cuts[p];
    if (width <= 0.0) continue;
    const double u = 0.5 * (cuts[p] + cuts[p + 1]);
    std::vector<std::pair<std::size_t, double>> entries;
    for (std::size_t i = 0; i < head; ++i) entries.emplace_back(order[i], x[order[i]]);
    for (std::size_t i = 0; i < tail_len; ++i) {
      const double q = std::ceil(cum[i] - u);
      if (q + u >= cum[i] && q + u < cum[i + 1]) {
        const std::size_t idx = order[head + i];
        entries.emplace_back(idx, std::copysign(level, x[idx]));
      }
    }
    std::sort(entries.begin(), entries.end());
    double sq = 0.0;
    for (const auto& e : entries) sq += e.second * e.second;
    const double na = std::sqrt(sq);
    if (na == 0.0) continue;
    SparseAtom atom;
    for (const auto& [idx, v] : entries) {
      atom.indices.push_back(idx);
      atom.values.push_back(v / na);
    }
    out.atoms.push_back(std::move(atom));
    out.weights.push_back(width * na / 2.0);
  }
  return out;
}

UmCheck verify_um(std::span<const double> x, const UmDecomposition& d) {
  if (d.weights.size() != d.atoms.size()) throw std::invalid_argument("verify_um: weights and atoms differ in count");
  UmCheck check;
  Vector sum(x.size(), 0.0);
  for (std::size_t j = 0; j < d.atoms.size(); ++j) {
    const SparseAtom& atom = d.atoms[j];
    check.max_support = std::max(check.max_support, atom.indices.size());
    check.weight_sum += d.weights[j];
    if (d.weights[j] < 0.0) check.weight_sum = std::numeric_limits<double>::infinity();
    check.max_atom_norm_error = std::max(check.max_atom_norm_error, std::abs(norm2(atom.values) - 1.0));
    for (std::size_t q = 0; q < atom.indices.size(); ++q)
      sum.at(atom.indices[q]) += 2.0 * d.weights[j] * atom.values[q];
  }
  for (std::size_t i = 0; i < x.size(); ++i) sum[i] -= x[i];
  check.residual = norm2(sum);
  return check;
}

}  // namespace sgrecon
