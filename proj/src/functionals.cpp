#include "sfront/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sfront/error.hpp"

namespace sfront {

namespace {

/// int_a^b e^{cz} dz, stable for small c (b - a).
double exp_integral(double c, double a, double b) {
  if (c == 0.0) return b - a;
  return std::exp(c * a) * std::expm1(c * (b - a)) / c;
}

double potential(const DoubleWell& well, const Forcing& forcing, double y, double u, double eps) {
  return well.W(u) / eps - forcing.G(y, u);
}

/// Per-unit-length energy density of one axial row (used for tail terms).
double row_density(const Field& u, int j, double eps, const DoubleWell& well,
                   const Forcing& forcing) {
  const CylinderGrid& g = u.grid;
  const double dy = g.dy();
  double e = 0.0;
  for (int i = 0; i < g.ny(); ++i)
    e += g.section.weight(i) * potential(well, forcing, g.y(i), u.at(i, j), eps);
  for (int i = 0; i + 1 < g.ny(); ++i) {
    const double d = u.at(i + 1, j) - u.at(i, j);
    e += 0.5 * eps * d * d / dy;
  }
  return e;
}

struct Segment {
  double y0, z0, y1, z1;
};

double point_segment_distance(const Segment& s, double y, double z) {
  const double dy = s.y1 - s.y0, dz = s.z1 - s.z0;
  const double len2 = dy * dy + dz * dz;
  double t = len2 > 0 ? ((y - s.y0) * dy + (z - s.z0) * dz) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double py = s.y0 + t * dy - y, pz = s.z0 + t * dz - z;
  return std::sqrt(py * py + pz * pz);
}

/// Graph of psi as a polyline; masked neighbours are joined by a flat half
/// cell and a vertical ray to -infinity.
class GraphGeometry {
 public:
  explicit GraphGeometry(const Profile& psi) : psi_(psi) {
    const CrossSection& s = psi.section;
    const double h = s.dy();
    for (int i = 0; i + 1 < s.nodes; ++i) {
      const bool m0 = psi.is_masked(i), m1 = psi.is_masked(i + 1);
      if (!m0 && !m1) {
        segments_.push_back({s.y(i), psi.values[i], s.y(i + 1), psi.values[i + 1]});
      } else if (!m0 && m1) {
        const double yb = s.y(i) + 0.5 * h;
        segments_.push_back({s.y(i), psi.values[i], yb, psi.values[i]});
        rays_.push_back({yb, psi.values[i]});
      } else if (m0 && !m1) {
        const double yb = s.y(i + 1) - 0.5 * h;
        segments_.push_back({yb, psi.values[i + 1], s.y(i + 1), psi.values[i + 1]});
        rays_.push_back({yb, psi.values[i + 1]});
      }
    }
  }

  double height(double y) const {
    const CrossSection& s = psi_.section;
    const double h = s.dy();
    int k = static_cast<int>(std::floor(y / h));
    k = std::clamp(k, 0, s.nodes - 2);
    const double t = std::clamp((y - s.y(k)) / h, 0.0, 1.0);
    const bool m0 = psi_.is_masked(k), m1 = psi_.is_masked(k + 1);
    const double ninf = -std::numeric_limits<double>::infinity();
    if (!m0 && !m1) return (1 - t) * psi_.values[k] + t * psi_.values[k + 1];
    if (!m0 && m1) return t <= 0.5 ? psi_.values[k] : ninf;
    if (m0 && !m1) return t >= 0.5 ? psi_.values[k + 1] : ninf;
    return ninf;
  }

  double signed_distance(double y, double z) const {
    double d = std::numeric_limits<double>::infinity();
    for (const Segment& s : segments_) d = std::min(d, point_segment_distance(s, y, z));
    for (const auto& [yb, ztop] : rays_) {
      const double dz = z > ztop ? z - ztop : 0.0;
      d = std::min(d, std::hypot(y - yb, dz));
    }
    return z < height(y) ? d : -d;
  }

 private:
  const Profile& psi_;
  std::vector<Segment> segments_;
  std::vector<std::pair<double, double>> rays_;
};

}  // namespace

// ---------------------------------------------------------------------------
// DiscreteSet

DiscreteSet::DiscreteSet(CylinderGrid grid)
    : grid_(std::move(grid)), occ_(static_cast<std::size_t>(grid_.ny()) * (grid_.nz - 1), 0) {}

DiscreteSet DiscreteSet::subgraph(const CylinderGrid& grid, const Profile& psi) {
  if (psi.size() != grid.ny()) throw Error("grid", "profile does not match grid");
  DiscreteSet S(grid);
  for (int i = 0; i < grid.ny(); ++i) {
    if (psi.is_masked(i)) continue;
    for (int j = 0; j < S.rows(); ++j) S.set(i, j, grid.z(j) + 0.5 * grid.dz < psi.values[i]);
  }
  return S;
}

bool DiscreteSet::empty() const {
  return std::none_of(occ_.begin(), occ_.end(), [](std::uint8_t v) { return v != 0; });
}

bool DiscreteSet::bounded_above() const {
  for (int i = 0; i < columns(); ++i)
    if (contains(i, rows() - 1)) return false;
  return true;
}

std::vector<DiscreteSet::Face> DiscreteSet::boundary_faces() const {
  std::vector<Face> faces;
  for (int i = 0; i < columns(); ++i) {
    for (int j = 1; j < rows(); ++j)
      if (contains(i, j - 1) != contains(i, j)) faces.push_back({FaceKind::horizontal, i, j});
    if (contains(i, rows() - 1)) faces.push_back({FaceKind::horizontal, i, rows()});
  }
  for (int j = 0; j < rows(); ++j)
    for (int i = 0; i + 1 < columns(); ++i)
      if (contains(i, j) != contains(i + 1, j)) faces.push_back({FaceKind::vertical, i, j});
  return faces;
}

std::vector<std::array<int, 3>> DiscreteSet::runs() const {
  std::vector<std::array<int, 3>> out;
  for (int i = 0; i < columns(); ++i) {
    int j = 0;
    while (j < rows()) {
      if (!contains(i, j)) {
        ++j;
        continue;
      }
      const int start = j;
      while (j < rows() && contains(i, j)) ++j;
      out.push_back({i, start, j});
    }
  }
  return out;
}

DiscreteSet DiscreteSet::from_runs(const CylinderGrid& grid,
                                   const std::vector<std::array<int, 3>>& runs) {
  DiscreteSet S(grid);
  for (const auto& [i, a, b] : runs) {
    if (i < 0 || i >= S.columns() || a < 0 || b > S.rows() || a > b)
      throw ConfigError("set-runs", "run outside the grid");
    for (int j = a; j < b; ++j) S.set(i, j, true);
  }
  return S;
}

// ---------------------------------------------------------------------------
// Diffuse energies

EnergyReport phi_c_eps(const Field& u, double c, double eps, const DoubleWell& well,
                       const Forcing& forcing, double end_tolerance) {
  const CylinderGrid& g = u.grid;
  const int ny = g.ny(), nz = g.nz;
  double end_lo = 0.0, end_hi = 0.0;
  for (int i = 0; i < ny; ++i) {
    end_lo = std::max(end_lo, std::abs(u.at(i, 1) - u.at(i, 0)));
    end_hi = std::max(end_hi, std::abs(u.at(i, nz - 1) - u.at(i, nz - 2)));
  }
  if (end_lo > end_tolerance || end_hi > end_tolerance) {
    std::ostringstream msg;
    msg << "field still varies at the window ends (" << end_lo << ", " << end_hi
        << ") beyond tolerance " << end_tolerance;
    throw Error("window-too-small", msg.str());
  }

  const double dy = g.dy(), dz = g.dz;
  const double z_lo = g.z(0), z_hi = g.z(nz - 1);
  double total = 0.0;
  for (int j = 0; j < nz; ++j) {
    const double a = std::max(z_lo, g.z(j) - 0.5 * dz);
    const double b = std::min(z_hi, g.z(j) + 0.5 * dz);
    const double omega = exp_integral(c, a, b);
    double row = 0.0;
    for (int i = 0; i < ny; ++i)
      row += g.section.weight(i) * potential(well, forcing, g.y(i), u.at(i, j), eps);
    for (int i = 0; i + 1 < ny; ++i) {
      const double d = u.at(i + 1, j) - u.at(i, j);
      row += 0.5 * eps * d * d / dy;
    }
    total += omega * row;
  }
  total += weighted_axial_dirichlet(u, c, eps);

  EnergyReport r;
  r.c = c;
  r.eps = eps;
  r.z_lo = z_lo;
  r.z_hi = z_hi;
  const double e0 = row_density(u, 0, eps, well, forcing);
  const double e1 = row_density(u, 1, eps, well, forcing);
  const double etop = row_density(u, nz - 1, eps, well, forcing);
  r.tail_estimate = c > 0 ? std::exp(c * z_lo) / c * e0 : 0.0;
  r.tail_bound = (c > 0 ? std::exp(c * z_lo) / c * std::abs(e1 - e0) : 0.0) +
                 std::exp(c * z_hi) * eps * std::abs(etop);
  r.value = total + r.tail_estimate;
  return r;
}

double weighted_axial_dirichlet(const Field& u, double c, double eps) {
  const CylinderGrid& g = u.grid;
  double total = 0.0;
  for (int j = 0; j + 1 < g.nz; ++j) {
    const double I = exp_integral(c, g.z(j), g.z(j + 1));
    double row = 0.0;
    for (int i = 0; i < g.ny(); ++i) {
      const double d = (u.at(i, j + 1) - u.at(i, j)) / g.dz;
      row += g.section.weight(i) * d * d;
    }
    total += 0.5 * eps * I * row;
  }
  return total;
}

double energy_E_eps(const Profile& v, double eps, const DoubleWell& well,
                    const Forcing& forcing) {
  const CrossSection& s = v.section;
  if (v.any_masked()) throw Error("masked-profile", "E^eps needs a finite profile");
  double e = 0.0;
  for (int i = 0; i < s.nodes; ++i)
    e += s.weight(i) * potential(well, forcing, s.y(i), v.values[i], eps);
  for (int i = 0; i + 1 < s.nodes; ++i) {
    const double d = v.values[i + 1] - v.values[i];
    e += 0.5 * eps * d * d / s.dy();
  }
  return e;
}

double integral_of_g(const Forcing& forcing, double a, double b) {
  const CrossSection& s = forcing.section();
  a = std::max(a, 0.0);
  b = std::min(b, s.length);
  if (b <= a) return 0.0;
  const double h = s.dy();
  const auto g_lin = [&](double y) {
    int k = std::clamp(static_cast<int>(std::floor(y / h)), 0, s.nodes - 2);
    const double t = (y - s.y(k)) / h;
    return (1 - t) * forcing.g(k) + t * forcing.g(k + 1);
  };
  double total = 0.0;
  double lo = a;
  while (lo < b) {
    int k = std::clamp(static_cast<int>(std::floor(lo / h + 1e-12)), 0, s.nodes - 2);
    const double hi = std::min(b, s.y(k + 1));
    if (hi <= lo) {  // rounding at a node
      lo = std::nextafter(lo, b);
      continue;
    }
    total += 0.5 * (g_lin(lo) + g_lin(hi)) * (hi - lo);
    lo = hi;
  }
  return total;
}

double energy_E0(std::vector<std::pair<double, double>> intervals, const Forcing& forcing,
                 const DoubleWell& well) {
  const double L = forcing.section().length;
  const double tol = 1e-12 * L;
  std::sort(intervals.begin(), intervals.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& [a, b] : intervals) {
    if (a < -tol || b > L + tol || b < a)
      throw ConfigError("intervals", "interval endpoints must satisfy 0 <= a <= b <= L");
    if (b - a <= tol) continue;
    if (!merged.empty() && a < merged.back().second - tol)
      throw ConfigError("intervals", "overlapping intervals");
    if (!merged.empty() && a <= merged.back().second + tol)
      merged.back().second = b;
    else
      merged.emplace_back(a, b);
  }
  double perimeter = 0.0, mass = 0.0;
  for (const auto& [a, b] : merged) {
    if (a > tol) perimeter += 1.0;
    if (b < L - tol) perimeter += 1.0;
    mass += integral_of_g(forcing, a, b);
  }
  return well.c_W() * perimeter - mass;
}

// ---------------------------------------------------------------------------
// Sets

double weighted_volume(const DiscreteSet& S, double c) {
  const CylinderGrid& g = S.grid();
  double v = 0.0;
  for (int i = 0; i < S.columns(); ++i) {
    double col = S.contains(i, 0) ? std::exp(c * g.z(0)) / c : 0.0;
    for (int j = 0; j < S.rows(); ++j)
      if (S.contains(i, j)) col += exp_integral(c, g.z(j), g.z(j + 1));
    v += S.column_width(i) * col;
  }
  return v;
}

double per_c(const DiscreteSet& S, double c) {
  if (!S.bounded_above()) throw Error("unbounded-set", "set reaches the top of the window");
  const CylinderGrid& g = S.grid();
  double p = 0.0;
  for (const auto& f : S.boundary_faces()) {
    if (f.kind == DiscreteSet::FaceKind::horizontal)
      p += S.column_width(f.i) * std::exp(c * g.z(f.j));
    else
      p += exp_integral(c, g.z(f.j), g.z(f.j + 1));
  }
  return p;
}

double fgeo_c(const DiscreteSet& S, double c, const DoubleWell& well, const Forcing& forcing) {
  const CylinderGrid& g = S.grid();
  double bulk = 0.0;
  for (int i = 0; i < S.columns(); ++i) {
    double col = S.contains(i, 0) ? std::exp(c * g.z(0)) / c : 0.0;
    for (int j = 0; j < S.rows(); ++j)
      if (S.contains(i, j)) col += exp_integral(c, g.z(j), g.z(j + 1));
    bulk += S.column_width(i) * forcing.g(i) * col;
  }
  return well.c_W() * per_c(S, c) - bulk;
}

double fgeo_subgraph(const Profile& psi, double c, const DoubleWell& well,
                     const Forcing& forcing) {
  const CrossSection& s = psi.section;
  const auto ez = [&](int i) { return psi.is_masked(i) ? 0.0 : std::exp(c * psi.values[i]); };
  double horizontal = 0.0, vertical = 0.0, bulk = 0.0;
  for (int i = 0; i < s.nodes; ++i) {
    horizontal += s.weight(i) * ez(i);
    bulk += s.weight(i) * forcing.g(i) * ez(i) / c;
  }
  for (int i = 0; i + 1 < s.nodes; ++i) vertical += std::abs(ez(i) - ez(i + 1)) / c;
  return well.c_W() * (horizontal + vertical) - bulk;
}

Profile rearrange_subgraph(const DiscreteSet& S, double c) {
  const CylinderGrid& g = S.grid();
  Profile psi(g.section);
  for (int i = 0; i < S.columns(); ++i) {
    double col = S.contains(i, 0) ? std::exp(c * g.z(0)) / c : 0.0;
    for (int j = 0; j < S.rows(); ++j)
      if (S.contains(i, j)) col += exp_integral(c, g.z(j), g.z(j + 1));
    if (col > 0.0) {
      psi.values[i] = std::log(c * col) / c;
    } else {
      psi.values[i] = 0.0;
      psi.masked[i] = 1;
    }
  }
  return psi;
}

// ---------------------------------------------------------------------------
// Sharp energies

double energy_F_c(const Profile& psi, double c, const DoubleWell& well, const Forcing& forcing) {
  if (psi.any_masked())
    throw Error("masked-profile", "F_c needs a finite profile; use energy_G_c for generalized ones");
  const CrossSection& s = psi.section;
  const double h = s.dy();
  double total = 0.0;
  for (int k = 0; k + 1 < s.nodes; ++k) {
    const double pm = 0.5 * (psi.values[k] + psi.values[k + 1]);
    const double slope = (psi.values[k + 1] - psi.values[k]) / h;
    const double gm = 0.5 * (forcing.g(k) + forcing.g(k + 1));
    total += h * std::exp(c * pm) * (well.c_W() * std::sqrt(1 + slope * slope) - gm / c);
  }
  return total;
}

double energy_G_c(const Profile& zeta, double c, const DoubleWell& well,
                  const Forcing& forcing) {
  const CrossSection& s = zeta.section;
  for (int i = 0; i < s.nodes; ++i) {
    if (zeta.is_masked(i) || zeta.values[i] < 0.0)
      throw Error("negative-zeta", "G_c is defined for nonnegative zeta only");
  }
  const double h = s.dy();
  double total = 0.0;
  for (int k = 0; k + 1 < s.nodes; ++k) {
    const double zm = 0.5 * (zeta.values[k] + zeta.values[k + 1]);
    const double slope = (zeta.values[k + 1] - zeta.values[k]) / h;
    const double gm = 0.5 * (forcing.g(k) + forcing.g(k + 1));
    total += h * (well.c_W() * std::hypot(c * zm, slope) - gm * zm);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Recovery sequence

InterfaceProfile::InterfaceProfile(const DoubleWell& well, double t_max, double step)
    : t_max_(t_max), step_(step) {
  if (!well.balanced()) throw Error("unbalanced-well", "interface profile needs a balanced well");
  const int half = static_cast<int>(std::lround(t_max / step));
  t_max_ = half * step;
  const std::size_t n = static_cast<std::size_t>(2 * half + 1);
  values_.assign(n, 0.5);
  slopes_.assign(n, 0.0);
  const auto rhs = [&](double g) { return std::sqrt(2.0 * std::max(well.W(g), 0.0)); };
  const auto integrate = [&](int dir) {
    double g = 0.5;
    const double h = dir * step;
    for (int k = 1; k <= half; ++k) {
      const double k1 = rhs(g);
      const double k2 = rhs(g + 0.5 * h * k1);
      const double k3 = rhs(g + 0.5 * h * k2);
      const double k4 = rhs(g + h * k3);
      g += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
      values_[static_cast<std::size_t>(half + dir * k)] = g;
    }
  };
  integrate(+1);
  integrate(-1);
  for (std::size_t k = 0; k < n; ++k) slopes_[k] = rhs(values_[k]);
}

double InterfaceProfile::operator()(double t) const {
  if (t >= t_max_) return values_.back();
  if (t <= -t_max_) return values_.front();
  const double x = (t + t_max_) / step_;
  std::size_t k = static_cast<std::size_t>(x);
  if (k >= values_.size() - 1) k = values_.size() - 2;
  const double s = x - static_cast<double>(k);
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * values_[k] + (s3 - 2 * s2 + s) * step_ * slopes_[k] +
         (-2 * s3 + 3 * s2) * values_[k + 1] + (s3 - s2) * step_ * slopes_[k + 1];
}

double smooth_cutoff(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / s), b = std::exp(-1.0 / (1.0 - s));
  return a / (a + b);
}

double signed_distance_to_graph(const Profile& psi, double y, double z) {
  return GraphGeometry(psi).signed_distance(y, z);
}

Field modica_mortola_recovery(const Profile& psi, double eps, double M, const DoubleWell& well,
                              const CylinderGrid& grid) {
  if (psi.size() != grid.ny()) throw Error("grid", "profile does not match grid");
  const double top = psi.max_unmasked();
  if (!(M > top)) throw Error("window", "cutoff depth M must exceed sup psi");
  if (grid.z(0) > -M - eps || grid.z(grid.nz - 1) < top + 10 * eps) {
    std::ostringstream msg;
    msg << "window [" << grid.z(0) << ", " << grid.z(grid.nz - 1) << "] must contain ["
        << -M - eps << ", " << top + 10 * eps << "]";
    throw Error("window", msg.str());
  }
  const InterfaceProfile gamma(well);
  const GraphGeometry geom(psi);
  Field u(grid);
  for (int j = 0; j < grid.nz; ++j) {
    const double z = grid.z(j);
    const double cut = smooth_cutoff((z + M) / eps);
    for (int i = 0; i < grid.ny(); ++i) {
      u.at(i, j) = cut == 0.0 ? 0.0 : gamma(geom.signed_distance(grid.y(i), z) / eps) * cut;
    }
  }
  return u;
}

Field phi_transform(const Field& u, const DoubleWell& well) {
  Field out(u.grid);
  out.t = u.t;
  for (std::size_t k = 0; k < u.u.size(); ++k) out.u[k] = well.phi(u.u[k]);
  return out;
}

}  // namespace sfront
