#pragma once

// Geometry, double-well nonlinearities, stratified forcings and the discrete
// fields that live on a truncated cylinder Omega x [z_min, z_max].
//
// The cross-section Omega is an interval [0, L] (two-dimensional cylinder)
// with homogeneous Neumann conditions. Nodes are vertex centred.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sfront {

struct CrossSection {
  double length = 1.0;
  int nodes = 3;

  CrossSection() = default;
  CrossSection(double length, int nodes);

  double dy() const { return length / (nodes - 1); }
  double y(int i) const { return i == nodes - 1 ? length : i * dy(); }
  /// Trapezoid weight of node i (dy/2 at both ends).
  double weight(int i) const;
};

struct CylinderGrid {
  CrossSection section;
  double z_min = 0.0;  ///< local coordinate of node j = 0
  double dz = 0.1;
  int nz = 2;
  double z_shift = 0.0;  ///< accumulated translation of the moving window

  CylinderGrid() = default;
  /// Builds a window [z_min, z_max]; nz is chosen so the spacing is exactly dz
  /// and the upper end is the first node >= z_max.
  CylinderGrid(CrossSection section, double z_min, double z_max, double dz);

  int ny() const { return section.nodes; }
  double dy() const { return section.dy(); }
  double z_max() const { return z_min + (nz - 1) * dz; }
  /// Absolute axial coordinate of node row j (includes the window offset).
  double z(int j) const { return z_shift + z_min + j * dz; }
  double y(int i) const { return section.y(i); }
  std::size_t size() const { return static_cast<std::size_t>(ny()) * nz; }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * ny() + i;
  }
  /// Trapezoid weight in z (dz/2 at the two window ends).
  double z_weight(int j) const { return (j == 0 || j == nz - 1) ? 0.5 * dz : dz; }
};

/// Record of the pointwise checks made on a nonlinearity when it was built.
struct WellCertificate {
  bool balanced = false;        ///< W(0) = W(1) = 0 and W > 0 elsewhere
  bool roots_ok = false;        ///< f(0) = f(1) = 0
  bool stable_wells_ok = false; ///< f'(0) < 0 and f'(1) < 0 (finite differences)
  bool positivity_ok = false;   ///< W > 0 on every sample u not in {0, 1}
  double f_prime_0 = 0.0;
  double f_prime_1 = 0.0;
  double min_W_off_wells = 0.0;
  std::vector<double> u_samples;  ///< the grid the checks ran on ([-1, 2], 3001 points)
  std::string note;
};

/// Bistable nonlinearity f = -W' with its potential W, derivative f' and
/// (for balanced wells) the surface tension c_W = int_0^1 sqrt(2 W).
class DoubleWell {
 public:
  using Fn = std::function<double(double)>;

  /// W(u) = u^2 (1-u)^2 / 4, f(u) = u (1-u)(u - 1/2), c_W = 1/(6 sqrt 2).
  static DoubleWell quartic();

  /// Unbalanced cubic f(u) = u (1-u)(u - alpha). Used for the classical
  /// one-dimensional bistable front; c_W is not defined (NaN).
  static DoubleWell cubic(double alpha);

  /// Generic constructor; runs the validity checks and tabulates phi.
  DoubleWell(std::string name, Fn W, Fn f, Fn f_prime);

  double W(double u) const { return W_(u); }
  double f(double u) const { return f_(u); }
  double f_prime(double u) const { return fp_(u); }
  double W_second(double u) const { return -fp_(u); }
  double c_W() const { return c_W_; }
  bool balanced() const { return cert_.balanced; }
  const std::string& name() const { return name_; }
  const WellCertificate& certificate() const { return cert_; }

  /// phi(u) = int_0^u sqrt(2 W(s)) ds (W clipped at zero for unbalanced wells).
  double phi(double u) const;

 private:
  std::string name_;
  Fn W_, f_, fp_;
  double c_W_ = 0.0;
  WellCertificate cert_;
  double phi_u0_ = -1.0;
  double phi_du_ = 0.0;
  std::vector<double> phi_table_;
  std::vector<double> phi_slope_;
};

/// How the stratified term a(y, u) is specified.
struct ForcingDescriptor {
  enum class Kind { product, tabulated };
  Kind kind = Kind::product;
  std::string label;

  /// Product form a(y,u) = 6 g0(y) (u - u^2); G(y, 1) = g0(y).
  std::function<double(double)> g0;

  /// General tabulated a on a rectilinear (y, u) grid, values row-major by y.
  std::vector<double> y_knots;
  std::vector<double> u_knots;
  std::vector<double> a_values;

  static ForcingDescriptor constant(double g);
  /// g0(y) = mean * (1 + rel_amplitude * cos(pi y / L)).
  static ForcingDescriptor cosine(double mean, double rel_amplitude, double length);
  /// Product form with g0 given as a table, linearly interpolated.
  static ForcingDescriptor product_table(std::vector<double> y, std::vector<double> g);
  static ForcingDescriptor tabulated(std::vector<double> y_knots,
                                     std::vector<double> u_knots,
                                     std::vector<double> a_values);
};

/// Evaluators for a(y,u), G(y,u) = int_0^u a(y,s) ds, a_u, and g(y) = G(y,1)
/// sampled on a cross-section.
class Forcing {
 public:
  Forcing() = default;

  double a(double y, double u) const;
  double G(double y, double u) const;
  double a_u(double y, double u) const;
  /// g at cross-section node i.
  double g(int i) const { return g_[static_cast<std::size_t>(i)]; }
  /// g at an arbitrary y (linear interpolation between nodes for tables).
  double g_at(double y) const;
  const std::vector<double>& g_nodes() const { return g_; }
  const CrossSection& section() const { return section_; }
  const std::string& label() const { return label_; }
  ForcingDescriptor::Kind kind() const { return kind_; }

  double g_mean() const;  ///< (1/|Omega|) int g dy (trapezoid)
  double g_max() const;
  double g_min() const;
  /// Breakpoints in u where a(y, .) is only piecewise smooth.
  const std::vector<double>& u_breakpoints() const { return u_knots_; }

  /// Supremum of |G| over the sampled cross-section and u in [u_lo, u_hi].
  double G_sup(double u_lo, double u_hi) const;

  friend Forcing build_forcing(const ForcingDescriptor& spec, const CrossSection& section);

 private:
  ForcingDescriptor::Kind kind_ = ForcingDescriptor::Kind::product;
  std::string label_;
  CrossSection section_;
  std::function<double(double)> g0_;
  std::vector<double> y_knots_, u_knots_, a_values_;
  std::vector<double> g_;

  double table_a(double y, double u) const;
  double table_G(double y, double u) const;
  double table_a_u(double y, double u) const;
};

/// Builds the forcing and checks a(y, 0) = 0 and g = G(., 1) against an
/// independent quadrature. Throws ConfigError("nonzero-at-origin") when
/// |a(y, 0)| exceeds 1e-12.
Forcing build_forcing(const ForcingDescriptor& spec, const CrossSection& section);

/// Largest deviation |G(y_i, 1) - quadrature of a(y_i, .)| over the nodes.
double forcing_quadrature_defect(const Forcing& forcing);

struct WellConstantsReport {
  double eps = 0.0;
  double C = 1.0;
  double delta0 = 0.2;
  bool nonnegative_ok = false;  ///< eps^-1 W - G >= 0 outside (1 - C sqrt eps, 1 + C sqrt eps)
  bool increasing_ok = false;   ///< eps^-1 W - G increasing on [1 + C eps, 1 + delta0] (vacuous if empty)
  bool pass = false;
  double nonnegative_margin = 0.0;  ///< min of eps^-1 W - G on the checked set
  double increase_margin = 0.0;     ///< min forward difference on the monotone window
  std::string reason;
};

WellConstantsReport check_well_constants(const DoubleWell& well, const Forcing& forcing,
                                         double eps, double C = 1.0, double delta0 = 0.2);

/// Largest eps in `candidates` passing both checks.
std::optional<double> largest_admissible_eps(const DoubleWell& well, const Forcing& forcing,
                                             const std::vector<double>& candidates,
                                             double C = 1.0, double delta0 = 0.2);

/// Scalar field u(y_i, z_j) on a cylinder window.
struct Field {
  CylinderGrid grid;
  std::vector<double> u;
  double t = 0.0;

  Field() = default;
  explicit Field(CylinderGrid g, double value = 0.0)
      : grid(std::move(g)), u(grid.size(), value) {}

  double& at(int i, int j) { return u[grid.index(i, j)]; }
  double at(int i, int j) const { return u[grid.index(i, j)]; }

  template <class Fn>
  static Field from_function(const CylinderGrid& grid, Fn&& fn) {
    Field f(grid);
    for (int j = 0; j < grid.nz; ++j)
      for (int i = 0; i < grid.ny(); ++i) f.at(i, j) = fn(grid.y(i), grid.z(j));
    return f;
  }

  bool all_finite() const;
};

/// Scalar function on the cross-section nodes. Nodes flagged in `masked`
/// carry the value -infinity (ln 0); only generalized sharp profiles use it.
struct Profile {
  CrossSection section;
  std::vector<double> values;
  std::vector<std::uint8_t> masked;

  Profile() = default;
  explicit Profile(CrossSection s, double value = 0.0)
      : section(s), values(static_cast<std::size_t>(s.nodes), value),
        masked(static_cast<std::size_t>(s.nodes), 0) {}

  template <class Fn>
  static Profile from_function(const CrossSection& s, Fn&& fn) {
    Profile p(s);
    for (int i = 0; i < s.nodes; ++i) p.values[i] = fn(s.y(i));
    return p;
  }

  int size() const { return section.nodes; }
  bool is_masked(int i) const { return masked[static_cast<std::size_t>(i)] != 0; }
  bool any_masked() const;
  /// Value with the -infinity convention applied.
  double value(int i) const;
  double max_unmasked() const;
  double min_unmasked() const;
};

}  // namespace sfront
