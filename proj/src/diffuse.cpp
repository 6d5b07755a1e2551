#include "sfront/diffuse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sfront/error.hpp"
#include "sfront/numerics.hpp"

namespace sfront {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// f(u)/eps^2 + a(y_i, u)/eps with a fast path for the product form.
class Reaction {
 public:
  Reaction(const DoubleWell& well, const Forcing& forcing, double eps)
      : well_(well), forcing_(forcing), eps_(eps),
        product_(forcing.kind() == ForcingDescriptor::Kind::product) {}

  double operator()(int i, double y, double u) const {
    const double a = product_ ? 6.0 * forcing_.g(i) * (u - u * u) : forcing_.a(y, u);
    return well_.f(u) / (eps_ * eps_) + a / eps_;
  }
  /// a(y_i, u) and a_u(y_i, u)
  double a(int i, double y, double u) const {
    return product_ ? 6.0 * forcing_.g(i) * (u - u * u) : forcing_.a(y, u);
  }
  double a_u(int i, double y, double u) const {
    return product_ ? 6.0 * forcing_.g(i) * (1.0 - 2.0 * u) : forcing_.a_u(y, u);
  }

 private:
  const DoubleWell& well_;
  const Forcing& forcing_;
  double eps_;
  bool product_;
};

/// u(z_j) <- u(z_j + R) by linear interpolation along z, clamped at the ends.
void translate_field(Field& u, double R, std::vector<double>& scratch) {
  const CylinderGrid& g = u.grid;
  const int ny = g.ny(), nz = g.nz;
  const double s = R / g.dz;
  const double k = std::floor(s);
  const double th = s - k;
  const int ki = static_cast<int>(k);
  scratch.assign(u.u.begin(), u.u.end());
  for (int j = 0; j < nz; ++j) {
    const int j0 = std::clamp(j + ki, 0, nz - 1);
    const int j1 = std::clamp(j + ki + 1, 0, nz - 1);
    for (int i = 0; i < ny; ++i)
      u.u[g.index(i, j)] = (1.0 - th) * scratch[g.index(i, j0)] + th * scratch[g.index(i, j1)];
  }
}

double mass_above_half(const Field& u) {
  const CylinderGrid& g = u.grid;
  double m = 0.0;
  for (int j = 0; j < g.nz; ++j)
    for (int i = 0; i < g.ny(); ++i)
      if (u.at(i, j) > 0.5) m += g.section.weight(i) * g.z_weight(j);
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// Parameters and grids

double DiffuseRunParams::axial_spacing() const {
  if (dz > 0.0) return dz;
  return std::min(eps / 4.0, 2.5 * eps * eps);
}

void DiffuseRunParams::validate(const CylinderGrid& grid) const {
  if (!(eps > 0.0)) throw ConfigError("params", "eps must be positive");
  if (!(time_step() > 0.0)) throw ConfigError("params", "time step must be positive");
  const double slack = 1.0 + 1e-9;
  if (grid.dz > slack * eps / 4.0)
    throw ConfigError("grid", "axial spacing must not exceed eps/4");
  if (grid.dy() > slack * eps / 4.0)
    throw ConfigError("grid", "transverse spacing must not exceed eps/4");
  if (grid.z_max() - grid.z_min < 10.0 * eps * (1.0 - 1e-9))
    throw ConfigError("grid", "axial window must be at least 10 eps long");
}

CrossSection section_for_eps(double length, double eps) {
  const int cells = std::max(2, static_cast<int>(std::ceil(length / (eps / 4.0) - 1e-9)));
  return CrossSection(length, cells + 1);
}

CylinderGrid diffuse_grid(const CrossSection& section, const DiffuseRunParams& params) {
  return CylinderGrid(section, -params.window_below * params.eps,
                      params.window_above * params.eps, params.axial_spacing());
}

Field planar_front(const CylinderGrid& grid, double eps, const DoubleWell& well, double z0) {
  const InterfaceProfile gamma(well);
  return Field::from_function(grid, [&](double, double z) { return gamma(-(z - z0) / eps); });
}

// ---------------------------------------------------------------------------
// Stepper

RdStepper::Factor RdStepper::factorise(std::vector<double> lower, std::vector<double> diag,
                                       std::vector<double> upper) {
  Factor f;
  const std::size_t n = diag.size();
  f.mult.assign(n, 0.0);
  f.inv_diag.assign(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    f.mult[k] = lower[k] / diag[k - 1];
    diag[k] -= f.mult[k] * upper[k - 1];
  }
  for (std::size_t k = 0; k < n; ++k) f.inv_diag[k] = 1.0 / diag[k];
  f.lower = std::move(lower);
  f.upper = std::move(upper);
  return f;
}

void RdStepper::Factor::solve(std::vector<double>& x) const {
  const std::size_t n = inv_diag.size();
  for (std::size_t k = 1; k < n; ++k) x[k] -= mult[k] * x[k - 1];
  x[n - 1] *= inv_diag[n - 1];
  for (std::size_t k = n - 1; k-- > 0;) x[k] = (x[k] - upper[k] * x[k + 1]) * inv_diag[k];
}

RdStepper::RdStepper(const CylinderGrid& grid, const DiffuseRunParams& params,
                     const DoubleWell& well, const Forcing& forcing, double c)
    : grid_(grid), well_(&well), forcing_(&forcing), eps_(params.eps),
      dt_(params.time_step()), c_(c), band_(params.band_delta), theta_(params.time_theta) {
  if (!(theta_ >= 0.5 && theta_ <= 1.0)) throw ConfigError("params", "time_theta must lie in [0.5, 1]");
  if (forcing.section().nodes != grid.ny())
    throw ConfigError("grid", "forcing and field use different cross-sections");
  const int ny = grid.ny(), nz = grid.nz;
  const double hy2 = grid.dy() * grid.dy();
  ay_lo_.assign(ny, 1.0 / hy2);
  ay_up_.assign(ny, 1.0 / hy2);
  ay_di_.assign(ny, -2.0 / hy2);
  ay_up_[0] = 2.0 / hy2;
  ay_lo_[ny - 1] = 2.0 / hy2;

  // exact discrete gradient of the e^{cz}-weighted Dirichlet energy
  const double hz2 = grid.dz * grid.dz;
  const double ep = std::exp(0.5 * c * grid.dz), em = std::exp(-0.5 * c * grid.dz);
  az_lo_.assign(nz, em / hz2);
  az_up_.assign(nz, ep / hz2);
  az_di_.assign(nz, -(ep + em) / hz2);
  az_lo_[0] = 0.0;
  az_up_[0] = (ep + 1.0) / hz2;
  az_di_[0] = -az_up_[0];
  az_up_[nz - 1] = 0.0;
  az_lo_[nz - 1] = (1.0 + em) / hz2;
  az_di_[nz - 1] = -az_lo_[nz - 1];

  const auto implicit = [&](const std::vector<double>& lo, const std::vector<double>& di,
                            const std::vector<double>& up) {
    std::vector<double> l(lo.size()), d(di.size()), u(up.size());
    for (std::size_t k = 0; k < di.size(); ++k) {
      l[k] = -dt_ * lo[k];
      d[k] = 1.0 - dt_ * di[k];
      u[k] = -dt_ * up[k];
    }
    return factorise(std::move(l), std::move(d), std::move(u));
  };
  fy_ = implicit(ay_lo_, ay_di_, ay_up_);
  fz_ = implicit(az_lo_, az_di_, az_up_);
  rhs_.assign(grid.size(), 0.0);
  buf_.assign(static_cast<std::size_t>(std::max(ny, nz)), 0.0);
}

StepStats RdStepper::step(Field& field) {
  const CylinderGrid& g = grid_;
  const int ny = g.ny(), nz = g.nz;
  const Reaction react(*well_, *forcing_, eps_);
  const std::vector<double>& u = field.u;

  for (int j = 0; j < nz; ++j) {
    for (int i = 0; i < ny; ++i) {
      const std::size_t k = g.index(i, j);
      double ay = ay_di_[i] * u[k];
      if (i > 0) ay += ay_lo_[i] * u[k - 1];
      if (i < ny - 1) ay += ay_up_[i] * u[k + 1];
      double az = az_di_[j] * u[k];
      if (j > 0) az += az_lo_[j] * u[k - ny];
      if (j < nz - 1) az += az_up_[j] * u[k + ny];
      rhs_[k] = dt_ * (ay + az + react(i, g.y(i), u[k]));
    }
  }
  if (theta_ < 1.0) {
    solve_linearised(u);
  } else {
    solve_explicit_reaction();
  }

  return finish(field);
}

void RdStepper::solve_explicit_reaction() {
  const CylinderGrid& g = grid_;
  const int ny = g.ny(), nz = g.nz;
  // (I - dt A_y) w = rhs, row by row
  buf_.resize(static_cast<std::size_t>(ny));
  for (int j = 0; j < nz; ++j) {
    std::copy_n(rhs_.begin() + static_cast<std::ptrdiff_t>(g.index(0, j)), ny, buf_.begin());
    fy_.solve(buf_);
    std::copy_n(buf_.begin(), ny, rhs_.begin() + static_cast<std::ptrdiff_t>(g.index(0, j)));
  }
  // (I - dt A_z) delta = w, all columns at once
  for (int j = 1; j < nz; ++j) {
    const double m = fz_.mult[j];
    for (int i = 0; i < ny; ++i) rhs_[g.index(i, j)] -= m * rhs_[g.index(i, j - 1)];
  }
  for (int i = 0; i < ny; ++i) rhs_[g.index(i, nz - 1)] *= fz_.inv_diag[nz - 1];
  for (int j = nz - 1; j-- > 0;) {
    const double up = fz_.upper[j], inv = fz_.inv_diag[j];
    for (int i = 0; i < ny; ++i)
      rhs_[g.index(i, j)] = (rhs_[g.index(i, j)] - up * rhs_[g.index(i, j + 1)]) * inv;
  }
}

void RdStepper::solve_linearised(const std::vector<double>& u) {
  // (I - th dt (A_y + J/2)) (I - th dt (A_z + J/2)) delta = rhs, J = dR/du
  const CylinderGrid& g = grid_;
  const int ny = g.ny(), nz = g.nz;
  const double th = theta_ * dt_;
  const Reaction react(*well_, *forcing_, eps_);
  jac_.resize(u.size());
  for (int j = 0; j < nz; ++j)
    for (int i = 0; i < ny; ++i) {
      const std::size_t k = g.index(i, j);
      jac_[k] = well_->f_prime(u[k]) / (eps_ * eps_) + react.a_u(i, g.y(i), u[k]) / eps_;
    }
  std::vector<double> lo(ny), di(ny), up(ny);
  for (int j = 0; j < nz; ++j) {
    for (int i = 0; i < ny; ++i) {
      lo[i] = -th * ay_lo_[i];
      up[i] = -th * ay_up_[i];
      di[i] = 1.0 - th * (ay_di_[i] + 0.5 * jac_[g.index(i, j)]);
    }
    std::span<double> row(rhs_.data() + g.index(0, j), static_cast<std::size_t>(ny));
    num::solve_tridiagonal(lo, di, up, row);
  }
  // columns together: forward elimination with a node-dependent diagonal
  dz_scratch_.resize(u.size());
  std::vector<double>& d = dz_scratch_;
  for (int i = 0; i < ny; ++i)
    d[g.index(i, 0)] = 1.0 - th * (az_di_[0] + 0.5 * jac_[g.index(i, 0)]);
  for (int j = 1; j < nz; ++j) {
    const double l = -th * az_lo_[j], uprev = -th * az_up_[j - 1];
    for (int i = 0; i < ny; ++i) {
      const std::size_t k = g.index(i, j), kp = g.index(i, j - 1);
      const double m = l / d[kp];
      d[k] = 1.0 - th * (az_di_[j] + 0.5 * jac_[k]) - m * uprev;
      rhs_[k] -= m * rhs_[kp];
    }
  }
  for (int i = 0; i < ny; ++i) rhs_[g.index(i, nz - 1)] /= d[g.index(i, nz - 1)];
  for (int j = nz - 1; j-- > 0;) {
    const double up_j = -th * az_up_[j];
    for (int i = 0; i < ny; ++i) {
      const std::size_t k = g.index(i, j);
      rhs_[k] = (rhs_[k] - up_j * rhs_[g.index(i, j + 1)]) / d[k];
    }
  }
}

StepStats RdStepper::finish(Field& field) {
  StepStats stats;
  for (std::size_t k = 0; k < field.u.size(); ++k) {
    const double v = field.u[k] + rhs_[k];
    if (!(std::abs(v) <= 3.0)) {
      std::ostringstream msg;
      msg << "|u| exceeded 3 at t = " << field.t + dt_;
      throw NumericalError("blow-up", msg.str());
    }
    stats.max_change = std::max(stats.max_change, std::abs(rhs_[k]));
    if (v < 0.0) ++stats.below_band;
    if (v > 1.0 + band_) ++stats.above_band;
    field.u[k] = v;
  }
  field.t += dt_;
  return stats;
}

Field step_rd(const Field& u, const DiffuseRunParams& params, const DoubleWell& well,
              const Forcing& forcing) {
  Field out = u;
  RdStepper(u.grid, params, well, forcing).step(out);
  return out;
}

// ---------------------------------------------------------------------------
// Leading edge and window

double leading_edge(const Field& u, double theta) {
  const CylinderGrid& g = u.grid;
  std::vector<double> m(static_cast<std::size_t>(g.nz), -std::numeric_limits<double>::infinity());
  for (int j = 0; j < g.nz; ++j)
    for (int i = 0; i < g.ny(); ++i) m[j] = std::max(m[j], u.at(i, j));
  if (m[g.nz - 1] > theta)
    throw Error("no-crossing", "field exceeds theta at the top of the window");
  int top = -1;
  for (int j = g.nz - 1; j >= 0; --j) {
    if (m[j] > theta) {
      top = j;
      break;
    }
  }
  if (top < 0) throw Error("no-crossing", "field never exceeds theta");
  const double frac = (m[top] - theta) / (m[top] - m[top + 1]);
  return g.z(top) + frac * g.dz;
}

void shift_window(Field& u, int k) {
  if (k == 0) return;
  CylinderGrid& g = u.grid;
  const int ny = g.ny(), nz = g.nz;
  std::vector<double> out(u.u.size());
  for (int j = 0; j < nz; ++j) {
    const int src = std::clamp(j + k, 0, nz - 1);
    for (int i = 0; i < ny; ++i) out[g.index(i, j)] = u.u[g.index(i, src)];
  }
  u.u = std::move(out);
  g.z_shift += k * g.dz;
}

// ---------------------------------------------------------------------------
// Dynamic speed

DynamicSpeedResult measure_speed_dynamic(const Field& initial, const DiffuseRunParams& params,
                                         const DoubleWell& well, const Forcing& forcing,
                                         double theta) {
  params.validate(initial.grid);
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("params", "theta must lie in (0, 1)");
  DynamicSpeedResult res;
  res.thetas = {0.25, 0.5, 0.75};
  std::size_t primary = 1;
  if (theta != 0.5) {
    const auto it = std::find(res.thetas.begin(), res.thetas.end(), theta);
    if (it == res.thetas.end()) {
      res.thetas.push_back(theta);
      primary = res.thetas.size() - 1;
    } else {
      primary = static_cast<std::size_t>(it - res.thetas.begin());
    }
  }
  res.edges.assign(res.thetas.size(), {});

  Field u = initial;
  RdStepper stepper(u.grid, params, well, forcing, 0.0);
  const double t0 = u.t;
  const long steps = std::lround(params.t_max / stepper.dt());
  const double length = u.grid.z_max() - u.grid.z_min;
  int band_violations = 0;

  const auto record = [&] {
    res.times.push_back(u.t - t0);
    for (std::size_t k = 0; k < res.thetas.size(); ++k)
      res.edges[k].push_back(leading_edge(u, res.thetas[k]));
  };
  record();
  for (long n = 1; n <= steps; ++n) {
    const StepStats st = stepper.step(u);
    if (st.above_band > 0 || st.below_band > 0) ++band_violations;
    const double front = leading_edge(u, 0.25) - u.grid.z_shift - u.grid.z_min;
    if (front > (1.0 - params.shift_margin) * length || front < params.shift_margin * length) {
      const int k = static_cast<int>(std::lround((front - 0.5 * length) / u.grid.dz));
      shift_window(u, k);
    }
    if (n % params.record_every == 0 || n == steps) record();
  }

  const double t_end = res.times.back();
  const double t_fit = t_end * (1.0 - params.fit_fraction);
  std::size_t first = 0;
  while (first < res.times.size() && res.times[first] < t_fit) ++first;
  if (res.times.size() - first < 4) throw ConfigError("params", "too few samples in fit window");
  const std::span<const double> tt(res.times.data() + first, res.times.size() - first);
  for (std::size_t k = 0; k < res.thetas.size(); ++k) {
    const std::span<const double> rr(res.edges[k].data() + first, tt.size());
    res.slopes.push_back(num::fit_line(tt, rr).slope);
  }
  const std::span<const double> rp(res.edges[primary].data() + first, tt.size());
  const num::LineFit fit = num::fit_line(tt, rp);
  const std::size_t half = tt.size() / 2;
  const double s1 = num::fit_line(tt.subspan(0, half), rp.subspan(0, half)).slope;
  const double s2 = num::fit_line(tt.subspan(half), rp.subspan(half)).slope;

  SpeedResult& sp = res.speed;
  sp.c = fit.slope;
  sp.method = "dynamic-leading-edge";
  sp.residual = fit.slope_stderr;
  sp.bracket_lo = std::min(s1, s2);
  sp.bracket_hi = std::max(s1, s2);
  sp.converged = std::abs(s1 - s2) <= params.drift_tol;
  const auto [smin, smax] = std::minmax_element(res.slopes.begin(), res.slopes.end());
  sp.add("theta", theta);
  sp.add("theta_spread", *smax - *smin);
  sp.add("slope_first_half", s1);
  sp.add("slope_second_half", s2);
  sp.add("band_violation_steps", band_violations);
  sp.add("t_end", t_end);
  res.final_field = std::move(u);
  if (!sp.converged) {
    std::ostringstream msg;
    msg << "leading-edge slope still drifting: " << s1 << " vs " << s2;
    throw NumericalError("non-convergent-drift", msg.str());
  }
  return res;
}

// ---------------------------------------------------------------------------
// Transverse equilibria

namespace {

struct Tridiag {
  std::vector<double> lo, di, up;
};

/// Jacobian of r(v) = eps v'' + f(v)/eps + a(y, v) with mirrored ends.
Tridiag el_jacobian(const Profile& v, double eps, const DoubleWell& well, const Reaction& react) {
  const CrossSection& s = v.section;
  const int n = s.nodes;
  const double k = eps / (s.dy() * s.dy());
  Tridiag J{std::vector<double>(n, k), std::vector<double>(n), std::vector<double>(n, k)};
  J.up[0] = 2 * k;
  J.lo[n - 1] = 2 * k;
  for (int i = 0; i < n; ++i)
    J.di[i] = -2 * k + well.f_prime(v.values[i]) / eps + react.a_u(i, s.y(i), v.values[i]);
  return J;
}

std::vector<double> el_residual(const Profile& v, double eps, const DoubleWell& well,
                                const Reaction& react) {
  const CrossSection& s = v.section;
  const int n = s.nodes;
  const double k = eps / (s.dy() * s.dy());
  std::vector<double> r(n);
  for (int i = 0; i < n; ++i) {
    const double left = i > 0 ? v.values[i - 1] : v.values[1];
    const double right = i < n - 1 ? v.values[i + 1] : v.values[n - 2];
    r[i] = k * (left - 2 * v.values[i] + right) + well.f(v.values[i]) / eps +
           react.a(i, s.y(i), v.values[i]);
  }
  return r;
}

double sup_norm(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

double second_variation_min(const Profile& v, double eps, const DoubleWell& well,
                            const Forcing& forcing, int* iterations) {
  const Reaction react(well, forcing, eps);
  const CrossSection& s = v.section;
  const int n = s.nodes;
  Tridiag L = el_jacobian(v, eps, well, react);
  double sigma = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    L.lo[i] = -L.lo[i];
    L.up[i] = -L.up[i];
    L.di[i] = -L.di[i];
    double off = 0.0;
    if (i > 0) off += std::abs(L.lo[i]);
    if (i < n - 1) off += std::abs(L.up[i]);
    sigma = std::min(sigma, L.di[i] - off);
  }
  sigma -= 1.0;
  std::vector<double> shifted(L.di);
  for (double& d : shifted) d -= sigma;

  const auto apply = [&](const std::vector<double>& x) {
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) {
      y[i] = L.di[i] * x[i];
      if (i > 0) y[i] += L.lo[i] * x[i - 1];
      if (i < n - 1) y[i] += L.up[i] * x[i + 1];
    }
    return y;
  };
  const auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double t = 0.0;
    for (int i = 0; i < n; ++i) t += s.weight(i) * a[i] * b[i];
    return t;
  };

  std::vector<double> x(n, 1.0);
  for (int i = 0; i < n; ++i) x[i] += 1e-3 * std::cos(3.0 * i);
  double lambda = dot(x, apply(x)) / dot(x, x);
  int it = 0;
  for (; it < 20000; ++it) {
    std::vector<double> y = num::solve_tridiagonal_copy(L.lo, shifted, L.up, x);
    const double norm = std::sqrt(dot(y, y));
    for (int i = 0; i < n; ++i) x[i] = y[i] / norm;
    const double next = dot(x, apply(x));
    const bool done = std::abs(next - lambda) <= 1e-13 * std::max(1.0, std::abs(next));
    lambda = next;
    if (done) break;
  }
  if (iterations) *iterations = it + 1;
  return lambda;
}

EquilibriumResult find_equilibrium_v(double eps, const DoubleWell& well, const Forcing& forcing,
                                     const Profile& seed, double tol) {
  if (!(eps > 0.0)) throw ConfigError("params", "eps must be positive");
  if (seed.any_masked()) throw ConfigError("seed", "seed profile must be finite");
  if (seed.section.nodes != forcing.section().nodes)
    throw ConfigError("grid", "seed and forcing use different cross-sections");
  const Reaction react(well, forcing, eps);
  const CrossSection& s = seed.section;
  const int n = s.nodes;
  EquilibriumResult res;
  Profile v = seed;

  // implicit-diffusion gradient flow: v_t = v'' + f/eps^2 + a/eps
  const double dt = 0.25 * eps * eps;
  const double k = dt / (s.dy() * s.dy());
  std::vector<double> lo(n, -k), di(n, 1 + 2 * k), up(n, -k);
  up[0] = -2 * k;
  lo[n - 1] = -2 * k;

  double r = sup_norm(el_residual(v, eps, well, react));
  const int max_rounds = 200;
  for (int round = 0; round < max_rounds && r > tol; ++round) {
    for (int step = 0; step < 200; ++step) {
      std::vector<double> rhs(n);
      for (int i = 0; i < n; ++i) {
        rhs[i] = v.values[i] + dt * (well.f(v.values[i]) / (eps * eps) +
                                     react.a(i, s.y(i), v.values[i]) / eps);
      }
      v.values = num::solve_tridiagonal_copy(lo, di, up, rhs);
      ++res.flow_steps;
      for (double x : v.values)
        if (!(std::abs(x) <= 3.0)) throw NumericalError("divergence", "equilibrium flow diverged");
    }
    // Newton polish
    Profile trial = v;
    double rt = sup_norm(el_residual(trial, eps, well, react));
    for (int it = 0; it < 30 && rt > tol; ++it) {
      Tridiag J = el_jacobian(trial, eps, well, react);
      std::vector<double> d = el_residual(trial, eps, well, react);
      num::solve_tridiagonal(J.lo, J.di, J.up, d);
      for (int i = 0; i < n; ++i) trial.values[i] -= d[i];
      const double rn = sup_norm(el_residual(trial, eps, well, react));
      ++res.newton_steps;
      if (!std::isfinite(rn) || rn > 10 * rt) break;
      rt = rn;
    }
    if (rt < r) {
      v = trial;
      r = rt;
    } else {
      r = sup_norm(el_residual(v, eps, well, react));
    }
  }
  if (!(r <= tol)) {
    std::ostringstream msg;
    msg << "equilibrium residual " << r << " above tolerance " << tol;
    throw NumericalError("divergence", msg.str());
  }
  res.v = v;
  res.residual = r;
  res.trivial = sup_norm(v.values) < 1e-6;
  res.energy = energy_E_eps(v, eps, well, forcing);
  res.nu = second_variation_min(v, eps, well, forcing, &res.eigen_iterations);
  return res;
}

// ---------------------------------------------------------------------------
// Pinned minimisation and speed selection

std::string to_string(PinnedOutcome o) {
  switch (o) {
    case PinnedOutcome::stationary: return "stationary";
    case PinnedOutcome::collapse: return "collapse";
    case PinnedOutcome::runaway: return "runaway";
  }
  return "unknown";
}

PinnedResult minimize_phi_pinned(double c, const DiffuseRunParams& params, const DoubleWell& well,
                                 const Forcing& forcing, const Field& seed) {
  params.validate(seed.grid);
  if (!(c > 0.0)) throw ConfigError("params", "speed must be positive");
  PinnedResult res;
  res.u = seed;
  Field& u = res.u;
  DiffuseRunParams relax = params;
  relax.time_theta = 1.0;
  RdStepper stepper(u.grid, relax, well, forcing, c);
  const double theta = params.theta_pin;
  std::vector<double> scratch, prev;

  // classify a field whose theta-crossing is lost
  const auto lost = [&](const Field& f) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : f.u) mx = std::max(mx, x);
    return mx <= theta ? PinnedOutcome::collapse : PinnedOutcome::runaway;
  };

  bool crossing_lost = false;
  try {
    translate_field(u, leading_edge(u, theta), scratch);
  } catch (const Error&) {
    crossing_lost = true;
    res.outcome = lost(u);
  }
  for (int n = 0; !crossing_lost && n < params.max_steps; ++n) {
    prev = u.u;
    stepper.step(u);
    double R = 0.0;
    try {
      R = leading_edge(u, theta);
    } catch (const Error&) {
      crossing_lost = true;
      res.outcome = lost(u);
      res.drift = res.outcome == PinnedOutcome::runaway ? std::numeric_limits<double>::infinity()
                                                        : -std::numeric_limits<double>::infinity();
      break;
    }
    translate_field(u, R, scratch);
    res.steps = n + 1;
    res.drift = R / stepper.dt();
    double change = 0.0;
    for (std::size_t k = 0; k < prev.size(); ++k) change = std::max(change, std::abs(u.u[k] - prev[k]));
    res.shape_change = change / stepper.dt();
    if (res.shape_change < params.shape_tol) {
      res.shape_converged = true;
      break;
    }
  }
  if (!crossing_lost) {
    if (res.drift > 1e-12)
      res.outcome = PinnedOutcome::runaway;
    else if (res.drift < -1e-12)
      res.outcome = PinnedOutcome::collapse;
    else
      res.outcome = PinnedOutcome::stationary;
  }
  res.mass = mass_above_half(u);
  try {
    res.energy = phi_c_eps(u, c, params.eps, well, forcing);
    res.energy_ok = true;
  } catch (const Error&) {
    res.energy_ok = false;
    res.energy.value = kNaN;
  }
  return res;
}

DiffuseSpeedResult find_c_dagger_eps(const DiffuseRunParams& params, const DoubleWell& well,
                                     const Forcing& forcing) {
  const CylinderGrid grid = diffuse_grid(forcing.section(), params);
  return find_c_dagger_eps(params, well, forcing, planar_front(grid, params.eps, well));
}

DiffuseSpeedResult find_c_dagger_eps(const DiffuseRunParams& params, const DoubleWell& well,
                                     const Forcing& forcing, const Field& seed) {
  if (!well.balanced()) throw ConfigError("well", "speed selection needs a balanced well");
  const double cw = well.c_W();
  double lo = (1.0 - params.bracket_margin) * forcing.g_mean() / cw;
  double hi = (1.0 + params.bracket_margin) * forcing.g_max() / cw;
  lo = std::max(lo, 1e-3 * std::max(hi, 1e-3));
  if (!(hi > lo)) throw ConfigError("forcing", "empty speed bracket; is the forcing positive?");

  DiffuseSpeedResult out;
  Field warm = seed;
  const auto classify = [&](double c) {
    PinnedResult r = minimize_phi_pinned(c, params, well, forcing, warm);
    out.history.emplace_back(c, r.outcome);
    if (r.outcome != PinnedOutcome::collapse || std::isfinite(r.drift)) warm = r.u;
    return r;
  };

  PinnedResult r_lo = classify(lo);
  PinnedResult r_hi = classify(hi);
  PinnedResult last = r_lo;
  bool done = false;
  if (r_lo.outcome == PinnedOutcome::stationary) {
    hi = lo;
    last = r_lo;
    done = true;
  } else if (r_hi.outcome == PinnedOutcome::stationary) {
    lo = hi;
    last = r_hi;
    done = true;
  } else if (r_lo.outcome != PinnedOutcome::runaway || r_hi.outcome != PinnedOutcome::collapse) {
    std::ostringstream msg;
    msg << "bracket [" << lo << ", " << hi << "] classified as " << to_string(r_lo.outcome)
        << " / " << to_string(r_hi.outcome);
    throw NumericalError("bracket", msg.str());
  }

  double c = lo;
  double drift = r_lo.drift;
  for (int it = 0; !done && it < params.max_bisections && hi - lo >= params.tol_c; ++it) {
    const double w = hi - lo;
    double trial = std::isfinite(drift) ? c + drift : 0.5 * (lo + hi);
    if (!(trial > lo + 0.01 * w && trial < hi - 0.01 * w)) trial = 0.5 * (lo + hi);
    last = classify(trial);
    c = trial;
    drift = last.drift;
    if (last.outcome == PinnedOutcome::runaway) lo = trial;
    else if (last.outcome == PinnedOutcome::collapse) hi = trial;
    else {
      lo = hi = trial;
      break;
    }
    if (last.shape_converged && std::abs(drift) < 0.25 * params.tol_c && hi - lo >= params.tol_c) {
      // confirm a tight bracket around the predicted speed
      const double centre = c + drift;
      const double a = std::max(lo, centre - 0.5 * params.tol_c);
      const double b = std::min(hi, centre + 0.5 * params.tol_c);
      if (classify(a).outcome == PinnedOutcome::runaway) lo = a;
      if (classify(b).outcome == PinnedOutcome::collapse) hi = b;
    }
  }

  const double c_star = 0.5 * (lo + hi);
  PinnedResult fin = classify(c_star);
  SpeedResult& sp = out.speed;
  sp.c = c_star;
  sp.method = "pinned-gradient-flow";
  sp.bracket_lo = lo;
  sp.bracket_hi = hi;
  sp.residual = 0.5 * (hi - lo);
  sp.converged = hi - lo < params.tol_c || lo == hi;
  sp.add("eps", params.eps);
  sp.add("drift_at_c", fin.drift);
  sp.add("evaluations", static_cast<double>(out.history.size()));
  sp.add("dz", fin.u.grid.dz);
  sp.add("dy", fin.u.grid.dy());
  sp.add("mass_above_half", fin.mass);
  out.profile = fin.u;
  out.energy = fin.energy;
  out.energy_ok = fin.energy_ok;
  out.dynamic_speed = kNaN;
  if (params.cross_check) {
    DiffuseRunParams dp = params;
    dp.t_max = params.cross_check_t;
    Field start = out.profile;
    start.t = 0.0;
    const DynamicSpeedResult dyn = measure_speed_dynamic(start, dp, well, forcing, 0.5);
    out.dynamic_speed = dyn.speed.c;
    out.cross_check_ok = std::abs(dyn.speed.c - c_star) <= 0.05 * c_star;
    sp.add("dynamic_speed", dyn.speed.c);
  }
  return out;
}

CvarReport verify_cvar(const Field& u, double c, double eps, double c_dag_eps,
                       const DoubleWell& well, const Forcing& forcing, double tol) {
  if (!(c > 0.0)) throw ConfigError("params", "speed must be positive");
  CvarReport r;
  r.lhs = phi_c_eps(u, c, eps, well, forcing).value;
  r.rhs = (c * c - c_dag_eps * c_dag_eps) / (c * c) * weighted_axial_dirichlet(u, c, eps);
  r.margin = r.lhs - r.rhs;
  r.pass = r.margin >= -tol;
  return r;
}

}  // namespace sfront
