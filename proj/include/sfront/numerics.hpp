#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace sfront::num {

/// Composite Simpson rule on [a, b] with `nodes` points (forced odd, >= 3).
double simpson(const std::function<double(double)>& f, double a, double b,
               int nodes = 2049);

/// Solves a tridiagonal system in place (Thomas algorithm, no pivoting).
/// `lower[0]` and `upper[n-1]` are ignored. `rhs` is overwritten with the
/// solution; `diag` is used as scratch and clobbered.
void solve_tridiagonal(std::span<const double> lower, std::span<double> diag,
                       std::span<const double> upper, std::span<double> rhs);

/// Same system, but the matrix is left untouched (copies internally).
std::vector<double> solve_tridiagonal_copy(std::span<const double> lower,
                                           std::span<const double> diag,
                                           std::span<const double> upper,
                                           std::span<const double> rhs);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Linear interpolation on a sorted abscissa; clamps outside the range.
double interp_linear(std::span<const double> xs, std::span<const double> ys,
                     double x);

}  // namespace sfront::num
