#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sgrecon {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_err = 0.0;
};

/// Ordinary least squares y = intercept + slope * x; needs two distinct x values.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> v);
/// Sample standard deviation (n - 1 denominator); zero for fewer than two values.
double sample_std(std::span<const double> v);
/// Linear-interpolation quantile (type 7) for q in [0, 1].
double quantile(std::vector<double> v, double q);
double median(std::vector<double> v);

/// C(n, k) as a double (exact while representable).
double binomial(std::size_t n, std::size_t k);

/// Advances a strictly increasing index combination of size k drawn from [0, n).
/// Returns false after the last combination.
bool next_combination(std::vector<std::size_t>& combo, std::size_t n);

}  // namespace sgrecon
