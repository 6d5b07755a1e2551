#include "sfront/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sfront::num {

double simpson(const std::function<double(double)>& f, double a, double b,
               int nodes) {
  if (nodes < 3) nodes = 3;
  if (nodes % 2 == 0) ++nodes;
  const int panels = nodes - 1;
  const double h = (b - a) / panels;
  double sum = f(a) + f(b);
  for (int k = 1; k < panels; ++k) {
    sum += (k % 2 == 1 ? 4.0 : 2.0) * f(a + k * h);
  }
  return sum * h / 3.0;
}

void solve_tridiagonal(std::span<const double> lower, std::span<double> diag,
                       std::span<const double> upper, std::span<double> rhs) {
  const std::size_t n = diag.size();
  if (n == 0) return;
  for (std::size_t k = 1; k < n; ++k) {
    const double m = lower[k] / diag[k - 1];
    diag[k] -= m * upper[k - 1];
    rhs[k] -= m * rhs[k - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t k = n - 1; k-- > 0;) {
    rhs[k] = (rhs[k] - upper[k] * rhs[k + 1]) / diag[k];
  }
}

std::vector<double> solve_tridiagonal_copy(std::span<const double> lower,
                                           std::span<const double> diag,
                                           std::span<const double> upper,
                                           std::span<const double> rhs) {
  std::vector<double> d(diag.begin(), diag.end());
  std::vector<double> x(rhs.begin(), rhs.end());
  solve_tridiagonal(lower, d, upper, x);
  return x;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw std::invalid_argument("fit_line: need >= 2 paired points");
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n > 2) {
    double ss = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double r = y[k] - fit.intercept - fit.slope * x[k];
      ss += r * r;
    }
    fit.slope_stderr = std::sqrt(ss / static_cast<double>(n - 2) / sxx);
  }
  return fit;
}

double interp_linear(std::span<const double> xs, std::span<const double> ys,
                     double x) {
  if (xs.empty()) return 0.0;
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - xs.begin());
  const double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
  return ys[k - 1] + t * (ys[k] - ys[k - 1]);
}

}  // namespace sfront::num
