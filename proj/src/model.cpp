#include "sfront/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "sfront/error.hpp"
#include "sfront/numerics.hpp"

namespace sfront {

namespace {

constexpr double kWellScanLo = -1.0;
constexpr double kWellScanHi = 2.0;
constexpr int kWellScanSamples = 3001;
constexpr int kQuadratureNodes = 2049;

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) out[k] = a + (b - a) * k / (n - 1);
  return out;
}

std::size_t bracket_index(const std::vector<double>& knots, double x) {
  if (x <= knots.front()) return 0;
  if (x >= knots.back()) return knots.size() - 2;
  const auto it = std::upper_bound(knots.begin(), knots.end(), x);
  return static_cast<std::size_t>(it - knots.begin()) - 1;
}

}  // namespace

CrossSection::CrossSection(double len, int n) : length(len), nodes(n) {
  if (n < 3) throw ConfigError("grid", "cross-section needs at least 3 nodes");
  if (!(len > 0.0)) throw ConfigError("grid", "cross-section length must be positive");
}

double CrossSection::weight(int i) const {
  return (i == 0 || i == nodes - 1) ? 0.5 * dy() : dy();
}

CylinderGrid::CylinderGrid(CrossSection s, double zmin, double zmax, double spacing)
    : section(s), z_min(zmin), dz(spacing) {
  if (!(spacing > 0.0)) throw ConfigError("grid", "axial spacing must be positive");
  if (!(zmax > zmin)) throw ConfigError("grid", "empty axial window");
  nz = static_cast<int>(std::ceil((zmax - zmin) / spacing - 1e-9)) + 1;
  if (nz < 3) nz = 3;
}

// ---------------------------------------------------------------------------
// DoubleWell

DoubleWell DoubleWell::quartic() {
  return DoubleWell(
      "quartic", [](double u) { return 0.25 * u * u * (1 - u) * (1 - u); },
      [](double u) { return u * (1 - u) * (u - 0.5); },
      [](double u) { return -3 * u * u + 3 * u - 0.5; });
}

DoubleWell DoubleWell::cubic(double alpha) {
  std::ostringstream name;
  name << "cubic(" << alpha << ")";
  return DoubleWell(
      name.str(),
      [alpha](double u) {
        return u * u * u * u / 4 - (1 + alpha) * u * u * u / 3 + alpha * u * u / 2;
      },
      [alpha](double u) { return u * (1 - u) * (u - alpha); },
      [alpha](double u) { return -3 * u * u + 2 * (1 + alpha) * u - alpha; });
}

DoubleWell::DoubleWell(std::string name, Fn W, Fn f, Fn f_prime)
    : name_(std::move(name)), W_(std::move(W)), f_(std::move(f)), fp_(std::move(f_prime)) {
  cert_.u_samples = linspace(kWellScanLo, kWellScanHi, kWellScanSamples);
  const double w0 = W_(0.0), w1 = W_(1.0);
  cert_.roots_ok = std::abs(f_(0.0)) <= 1e-14 && std::abs(f_(1.0)) <= 1e-14;
  const double h = 1e-5;
  cert_.f_prime_0 = (f_(h) - f_(-h)) / (2 * h);
  cert_.f_prime_1 = (f_(1 + h) - f_(1 - h)) / (2 * h);
  cert_.stable_wells_ok = cert_.f_prime_0 < 0 && cert_.f_prime_1 < 0;
  double min_w = std::numeric_limits<double>::infinity();
  for (double u : cert_.u_samples) {
    if (std::abs(u) < 1e-9 || std::abs(u - 1.0) < 1e-9) continue;
    min_w = std::min(min_w, W_(u));
  }
  cert_.min_W_off_wells = min_w;
  cert_.positivity_ok = min_w > 0.0;
  cert_.balanced = std::abs(w0) <= 1e-14 && std::abs(w1) <= 1e-14 && cert_.positivity_ok &&
                   cert_.roots_ok && cert_.stable_wells_ok;
  cert_.note = "coercivity at infinity checked only on the sample window [-1, 2]";

  const auto density = [this](double u) { return std::sqrt(2.0 * std::max(W_(u), 0.0)); };
  c_W_ = cert_.balanced ? num::simpson(density, 0.0, 1.0, kQuadratureNodes)
                        : std::numeric_limits<double>::quiet_NaN();

  // Primitive of sqrt(2W) on [-1, 2]; anchored so phi(0) = 0.
  const int intervals = kWellScanSamples - 1;
  phi_u0_ = kWellScanLo;
  phi_du_ = (kWellScanHi - kWellScanLo) / intervals;
  phi_table_.assign(static_cast<std::size_t>(intervals + 1), 0.0);
  phi_slope_.assign(static_cast<std::size_t>(intervals + 1), 0.0);
  for (int k = 0; k <= intervals; ++k) phi_slope_[k] = density(phi_u0_ + k * phi_du_);
  for (int k = 0; k < intervals; ++k) {
    const double a = phi_u0_ + k * phi_du_;
    phi_table_[k + 1] = phi_table_[k] + num::simpson(density, a, a + phi_du_, 9);
  }
  const int k0 = static_cast<int>(std::lround(-phi_u0_ / phi_du_));
  const double offset = phi_table_[k0];
  for (double& v : phi_table_) v -= offset;
}

double DoubleWell::phi(double u) const {
  const double lo = phi_u0_;
  const double hi = phi_u0_ + phi_du_ * (phi_table_.size() - 1);
  const auto density = [this](double s) { return std::sqrt(2.0 * std::max(W_(s), 0.0)); };
  if (u < lo) return phi_table_.front() - num::simpson(density, u, lo, 257);
  if (u > hi) return phi_table_.back() + num::simpson(density, hi, u, 257);
  std::size_t k = static_cast<std::size_t>((u - lo) / phi_du_);
  if (k >= phi_table_.size() - 1) k = phi_table_.size() - 2;
  // Cubic Hermite with exact end slopes.
  const double h = phi_du_;
  const double t = (u - (lo + k * h)) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * phi_table_[k] + (t3 - 2 * t2 + t) * h * phi_slope_[k] +
         (-2 * t3 + 3 * t2) * phi_table_[k + 1] + (t3 - t2) * h * phi_slope_[k + 1];
}

// ---------------------------------------------------------------------------
// Forcing

ForcingDescriptor ForcingDescriptor::constant(double g) {
  ForcingDescriptor d;
  d.kind = Kind::product;
  std::ostringstream s;
  s << "constant(" << g << ")";
  d.label = s.str();
  d.g0 = [g](double) { return g; };
  return d;
}

ForcingDescriptor ForcingDescriptor::cosine(double mean, double rel_amplitude, double length) {
  ForcingDescriptor d;
  d.kind = Kind::product;
  std::ostringstream s;
  s << "cosine(" << mean << "," << rel_amplitude << ")";
  d.label = s.str();
  d.g0 = [=](double y) {
    return mean * (1.0 + rel_amplitude * std::cos(std::numbers::pi * y / length));
  };
  return d;
}

ForcingDescriptor ForcingDescriptor::product_table(std::vector<double> y, std::vector<double> g) {
  if (y.size() < 2 || y.size() != g.size())
    throw ConfigError("forcing", "product table needs >= 2 (y, g) pairs");
  if (!std::is_sorted(y.begin(), y.end()))
    throw ConfigError("forcing", "product table y values must be sorted");
  ForcingDescriptor d;
  d.kind = Kind::product;
  d.label = "product-table";
  d.g0 = [y = std::move(y), g = std::move(g)](double yy) { return num::interp_linear(y, g, yy); };
  return d;
}

ForcingDescriptor ForcingDescriptor::tabulated(std::vector<double> y_knots,
                                               std::vector<double> u_knots,
                                               std::vector<double> a_values) {
  if (y_knots.empty() || u_knots.size() < 2 || a_values.size() != y_knots.size() * u_knots.size())
    throw ConfigError("forcing", "tabulated forcing must be a full rectilinear (y, u) grid");
  if (!std::is_sorted(y_knots.begin(), y_knots.end()) ||
      !std::is_sorted(u_knots.begin(), u_knots.end()))
    throw ConfigError("forcing", "tabulated forcing knots must be sorted");
  if (u_knots.front() > 0.0 || u_knots.back() < 1.0)
    throw ConfigError("forcing", "tabulated forcing must cover u in [0, 1]");
  ForcingDescriptor d;
  d.kind = Kind::tabulated;
  d.label = "tabulated";
  d.y_knots = std::move(y_knots);
  d.u_knots = std::move(u_knots);
  d.a_values = std::move(a_values);
  return d;
}

double Forcing::table_a(double y, double u) const {
  const std::size_t nu = u_knots_.size();
  const auto row_value = [&](std::size_t r) {
    const double* row = a_values_.data() + r * nu;
    return num::interp_linear(u_knots_, std::span<const double>(row, nu), u);
  };
  if (y_knots_.size() == 1) return row_value(0);
  const std::size_t k = bracket_index(y_knots_, y);
  const double t = std::clamp((y - y_knots_[k]) / (y_knots_[k + 1] - y_knots_[k]), 0.0, 1.0);
  return (1 - t) * row_value(k) + t * row_value(k + 1);
}

double Forcing::table_G(double y, double u) const {
  // a(y, .) is piecewise linear in u with constant extension; integrate exactly.
  const std::size_t nu = u_knots_.size();
  const auto row_integral = [&](std::size_t r, double upper) {
    const double* row = a_values_.data() + r * nu;
    const auto prim = [&](double x) {
      // integral from u_knots_[0] to x
      double acc = 0.0;
      if (x <= u_knots_[0]) return (x - u_knots_[0]) * row[0];
      for (std::size_t m = 0; m + 1 < nu; ++m) {
        const double a0 = u_knots_[m], a1 = u_knots_[m + 1];
        if (x <= a1) {
          const double va = row[m];
          const double vx = row[m] + (row[m + 1] - row[m]) * (x - a0) / (a1 - a0);
          return acc + 0.5 * (va + vx) * (x - a0);
        }
        acc += 0.5 * (row[m] + row[m + 1]) * (a1 - a0);
      }
      return acc + (x - u_knots_.back()) * row[nu - 1];
    };
    return prim(upper) - prim(0.0);
  };
  if (y_knots_.size() == 1) return row_integral(0, u);
  const std::size_t k = bracket_index(y_knots_, y);
  const double t = std::clamp((y - y_knots_[k]) / (y_knots_[k + 1] - y_knots_[k]), 0.0, 1.0);
  return (1 - t) * row_integral(k, u) + t * row_integral(k + 1, u);
}

double Forcing::table_a_u(double y, double u) const {
  const std::size_t nu = u_knots_.size();
  const auto row_slope = [&](std::size_t r) {
    if (u < u_knots_.front() || u > u_knots_.back()) return 0.0;
    const double* row = a_values_.data() + r * nu;
    const std::size_t m = bracket_index(u_knots_, u);
    return (row[m + 1] - row[m]) / (u_knots_[m + 1] - u_knots_[m]);
  };
  if (y_knots_.size() == 1) return row_slope(0);
  const std::size_t k = bracket_index(y_knots_, y);
  const double t = std::clamp((y - y_knots_[k]) / (y_knots_[k + 1] - y_knots_[k]), 0.0, 1.0);
  return (1 - t) * row_slope(k) + t * row_slope(k + 1);
}

double Forcing::a(double y, double u) const {
  if (kind_ == ForcingDescriptor::Kind::product) return 6.0 * g0_(y) * (u - u * u);
  return table_a(y, u);
}

double Forcing::G(double y, double u) const {
  if (kind_ == ForcingDescriptor::Kind::product) return g0_(y) * (3.0 * u * u - 2.0 * u * u * u);
  return table_G(y, u);
}

double Forcing::a_u(double y, double u) const {
  if (kind_ == ForcingDescriptor::Kind::product) return 6.0 * g0_(y) * (1.0 - 2.0 * u);
  return table_a_u(y, u);
}

double Forcing::g_at(double y) const {
  if (kind_ == ForcingDescriptor::Kind::product) return g0_(y);
  return table_G(y, 1.0);
}

double Forcing::g_mean() const {
  double s = 0.0;
  for (int i = 0; i < section_.nodes; ++i) s += section_.weight(i) * g_[i];
  return s / section_.length;
}

double Forcing::g_max() const { return *std::max_element(g_.begin(), g_.end()); }
double Forcing::g_min() const { return *std::min_element(g_.begin(), g_.end()); }

double Forcing::G_sup(double u_lo, double u_hi) const {
  double sup = 0.0;
  for (int i = 0; i < section_.nodes; ++i) {
    const double y = section_.y(i);
    for (int k = 0; k <= 200; ++k) {
      const double u = u_lo + (u_hi - u_lo) * k / 200.0;
      sup = std::max(sup, std::abs(G(y, u)));
    }
  }
  return sup;
}

Forcing build_forcing(const ForcingDescriptor& spec, const CrossSection& section) {
  Forcing out;
  out.kind_ = spec.kind;
  out.label_ = spec.label;
  out.section_ = section;
  if (spec.kind == ForcingDescriptor::Kind::product) {
    if (!spec.g0) throw ConfigError("forcing", "product forcing needs g0");
    out.g0_ = spec.g0;
  } else {
    out.y_knots_ = spec.y_knots;
    out.u_knots_ = spec.u_knots;
    out.a_values_ = spec.a_values;
    // a(y, 0) = 0 on every knot row and at every cross-section node.
    for (std::size_t r = 0; r < out.y_knots_.size(); ++r) {
      const double y = out.y_knots_[r];
      if (std::abs(out.table_a(y, 0.0)) > 1e-12) {
        std::ostringstream msg;
        msg << "a(y, 0) = " << out.table_a(y, 0.0) << " at y = " << y << " (must vanish)";
        throw ConfigError("nonzero-at-origin", msg.str());
      }
    }
  }
  out.g_.resize(static_cast<std::size_t>(section.nodes));
  for (int i = 0; i < section.nodes; ++i) {
    const double y = section.y(i);
    if (std::abs(out.a(y, 0.0)) > 1e-12)
      throw ConfigError("nonzero-at-origin", "a(y, 0) must vanish");
    out.g_[i] = out.G(y, 1.0);
    if (!std::isfinite(out.g_[i])) throw ConfigError("forcing", "forcing is not finite");
  }
  return out;
}

double forcing_quadrature_defect(const Forcing& forcing) {
  const CrossSection& s = forcing.section();
  // Integrate piecewise between breakpoints inside (0, 1).
  std::vector<double> cuts{0.0};
  for (double b : forcing.u_breakpoints())
    if (b > 0.0 && b < 1.0) cuts.push_back(b);
  cuts.push_back(1.0);
  double worst = 0.0;
  for (int i = 0; i < s.nodes; ++i) {
    const double y = s.y(i);
    double q = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
      q += num::simpson([&](double u) { return forcing.a(y, u); }, cuts[k], cuts[k + 1],
                        kQuadratureNodes);
    worst = std::max(worst, std::abs(q - forcing.g(i)));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Well constants

WellConstantsReport check_well_constants(const DoubleWell& well, const Forcing& forcing,
                                         double eps, double C, double delta0) {
  WellConstantsReport r;
  r.eps = eps;
  r.C = C;
  r.delta0 = delta0;
  if (!(eps > 0.0)) throw ConfigError("eps", "eps must be positive");
  const CrossSection& s = forcing.section();
  const auto reduced = [&](double y, double u) { return well.W(u) / eps - forcing.G(y, u); };

  const double hole = C * std::sqrt(eps);
  // the scanned u range always reaches 2 past the excluded hole
  const double u_lo = std::min(kWellScanLo, 1.0 - hole - 2.0);
  const double u_hi = std::max(kWellScanHi, 1.0 + hole + 2.0);
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < s.nodes; ++i) {
    const double y = s.y(i);
    for (int k = 0; k < kWellScanSamples; ++k) {
      const double u = u_lo + (u_hi - u_lo) * k / (kWellScanSamples - 1);
      if (std::abs(u - 1.0) < hole) continue;
      margin = std::min(margin, reduced(y, u));
    }
  }
  r.nonnegative_margin = std::isfinite(margin) ? margin : 0.0;
  r.nonnegative_ok = !(margin < -1e-14);

  const double lo = 1.0 + C * eps, hi = 1.0 + delta0;
  if (lo >= hi) {
    r.increasing_ok = true;
    r.increase_margin = 0.0;
  } else {
    double worst = std::numeric_limits<double>::infinity();
    const int n = 401;
    for (int i = 0; i < s.nodes; ++i) {
      const double y = s.y(i);
      double prev = reduced(y, lo);
      for (int k = 1; k < n; ++k) {
        const double u = lo + (hi - lo) * k / (n - 1);
        const double cur = reduced(y, u);
        worst = std::min(worst, cur - prev);
        prev = cur;
      }
    }
    r.increase_margin = worst;
    r.increasing_ok = worst > 0.0;
    if (!r.increasing_ok) r.reason = "eps^-1 W - G is not increasing on [1 + C eps, 1 + delta0]";
  }
  if (!r.nonnegative_ok) r.reason = "eps^-1 W - G takes negative values away from u = 1";
  r.pass = r.nonnegative_ok && r.increasing_ok;
  return r;
}

std::optional<double> largest_admissible_eps(const DoubleWell& well, const Forcing& forcing,
                                             const std::vector<double>& candidates, double C,
                                             double delta0) {
  std::optional<double> best;
  for (double eps : candidates) {
    if (check_well_constants(well, forcing, eps, C, delta0).pass && (!best || eps > *best))
      best = eps;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Field / Profile

bool Field::all_finite() const {
  return std::all_of(u.begin(), u.end(), [](double v) { return std::isfinite(v); });
}

bool Profile::any_masked() const {
  return std::any_of(masked.begin(), masked.end(), [](std::uint8_t m) { return m != 0; });
}

double Profile::value(int i) const {
  return is_masked(i) ? -std::numeric_limits<double>::infinity() : values[i];
}

double Profile::max_unmasked() const {
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < size(); ++i)
    if (!is_masked(i)) m = std::max(m, values[i]);
  return m;
}

double Profile::min_unmasked() const {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < size(); ++i)
    if (!is_masked(i)) m = std::min(m, values[i]);
  return m;
}

}  // namespace sfront
