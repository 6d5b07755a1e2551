#include "sfront/sharp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>

#include "sfront/error.hpp"
#include "sfront/numerics.hpp"

namespace sfront {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_balanced(const DoubleWell& well) {
  if (!well.balanced() || !(well.c_W() > 0.0))
    throw ConfigError("well", "the sharp model needs a balanced well with c_W > 0");
}

void fmc_step_inplace(std::vector<double>& h, std::vector<double>& next, double dt, double dy,
                      double limit, const std::vector<double>& speed) {
  const int n = static_cast<int>(h.size());
  for (int i = 0; i < n; ++i) {
    const double left = i > 0 ? h[i - 1] : h[1];
    const double right = i < n - 1 ? h[i + 1] : h[n - 2];
    const double hy = (right - left) / (2 * dy);
    const double hyy = (right - 2 * h[i] + left) / (dy * dy);
    if (!(std::abs(hy) <= limit)) {
      std::ostringstream msg;
      msg << "|h_y| = " << std::abs(hy) << " exceeds " << limit;
      throw NumericalError("gradient-blow-up", msg.str());
    }
    const double q = 1 + hy * hy;
    next[i] = h[i] + dt * (hyy / q + speed[i] * std::sqrt(q));
  }
  h.swap(next);
}

std::vector<double> forcing_speed(const Forcing& forcing, const DoubleWell& well) {
  std::vector<double> s(forcing.g_nodes());
  for (double& v : s) v /= well.c_W();
  return s;
}

// -- smoothed G_c --------------------------------------------------------

struct GcProblem {
  const CrossSection& s;
  double c, cw, delta;
  std::vector<double> gm;  // cell-mean forcing
  std::vector<double> w;   // trapezoid weights

  GcProblem(const CrossSection& sec, double c_, double cw_, double d, const Forcing& f)
      : s(sec), c(c_), cw(cw_), delta(d) {
    const int n = s.nodes;
    for (int k = 0; k + 1 < n; ++k) gm.push_back(0.5 * (f.g(k) + f.g(k + 1)));
    for (int i = 0; i < n; ++i) w.push_back(s.weight(i));
  }

  double value(const std::vector<double>& z) const {
    const double h = s.dy();
    double t = 0.0;
    for (std::size_t k = 0; k + 1 < z.size(); ++k) {
      const double zm = 0.5 * (z[k] + z[k + 1]);
      const double sl = (z[k + 1] - z[k]) / h;
      t += h * (cw * std::sqrt(delta * delta + c * c * zm * zm + sl * sl) - gm[k] * zm);
    }
    return t;
  }

  void gradient_hessian(const std::vector<double>& z, std::vector<double>& g,
                        std::vector<double>& lo, std::vector<double>& di,
                        std::vector<double>& up) const {
    const std::size_t n = z.size();
    const double h = s.dy();
    g.assign(n, 0.0);
    lo.assign(n, 0.0);
    di.assign(n, 0.0);
    up.assign(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double zm = 0.5 * (z[k] + z[k + 1]);
      const double sl = (z[k + 1] - z[k]) / h;
      const double r = std::sqrt(delta * delta + c * c * zm * zm + sl * sl);
      const double gz = h * (cw * c * c * zm / r - gm[k]);
      const double gs = h * cw * sl / r;
      g[k] += 0.5 * gz - gs / h;
      g[k + 1] += 0.5 * gz + gs / h;
      const double f = h * cw / (r * r * r);
      const double A = f * c * c * (delta * delta + sl * sl);
      const double B = -f * c * c * zm * sl;
      const double C = f * (delta * delta + c * c * zm * zm);
      di[k] += 0.25 * A - B / h + C / (h * h);
      di[k + 1] += 0.25 * A + B / h + C / (h * h);
      const double off = 0.25 * A - C / (h * h);
      up[k] += off;
      lo[k + 1] += off;
    }
  }

  double mass(const std::vector<double>& z) const {
    double m = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) m += w[i] * z[i];
    return m;
  }
};

struct NewtonOutcome {
  int iterations = 0;
  double gradient = 0.0;
  bool converged = false;
};

/// Active-set Newton for one smoothing level.
NewtonOutcome newton_stage(const GcProblem& P, std::vector<double>& z, const SharpRunParams& prm) {
  const std::size_t n = z.size();
  std::vector<double> g, lo, di, up;
  std::vector<std::uint8_t> freev(n, 1);
  NewtonOutcome out;
  double value = P.value(z);
  for (int it = 0; it < prm.max_newton; ++it) {
    out.iterations = it + 1;
    P.gradient_hessian(z, g, lo, di, up);
    double zmax = 0.0;
    for (double v : z) zmax = std::max(zmax, v);
    const double act = 1e-14 * std::max(zmax, 1.0);

    const auto solve_free = [&](double& lambda, std::vector<double>& d) {
      std::vector<double> L(lo), D(di), U(up), a(n), b(n);
      double dmax = 0.0;
      for (double v : D) dmax = std::max(dmax, std::abs(v));
      for (std::size_t i = 0; i < n; ++i) {
        if (!freev[i]) {
          D[i] = 1.0;
          L[i] = 0.0;
          U[i] = 0.0;
          if (i > 0) U[i - 1] = 0.0;
          if (i + 1 < n) L[i + 1] = 0.0;
          a[i] = 0.0;
          b[i] = 0.0;
        } else {
          D[i] += 1e-13 * dmax;
          a[i] = g[i];
          b[i] = P.w[i];
        }
      }
      std::vector<double> D2(D);
      num::solve_tridiagonal(L, D, U, a);
      num::solve_tridiagonal(L, D2, U, b);
      double wa = 0.0, wb = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        wa += P.w[i] * a[i];
        wb += P.w[i] * b[i];
      }
      lambda = -wa / wb;
      d.assign(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) d[i] = freev[i] ? -(a[i] + lambda * b[i]) : 0.0;
      // H is nearly singular along zeta itself (1-homogeneity); strip the
      // rounding left in that direction so the step keeps int zeta = 1
      double wd = 0.0, wz = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        wd += P.w[i] * d[i];
        wz += P.w[i] * z[i];
      }
      for (std::size_t i = 0; i < n; ++i) d[i] -= wd / wz * z[i];
    };

    // free set: positive nodes, plus zero nodes whose reduced gradient pulls them up
    for (std::size_t i = 0; i < n; ++i) freev[i] = z[i] > act ? 1 : 0;
    if (std::none_of(freev.begin(), freev.end(), [](std::uint8_t f) { return f != 0; }))
      std::fill(freev.begin(), freev.end(), 1);
    double lambda = 0.0;
    std::vector<double> d;
    solve_free(lambda, d);
    bool grew = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!freev[i] && g[i] + lambda * P.w[i] < 0.0) {
        freev[i] = 1;
        grew = true;
      }
    }
    if (grew) solve_free(lambda, d);

    double grad = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (freev[i]) grad = std::max(grad, std::abs(g[i] + lambda * P.w[i]) / P.w[i]);
    out.gradient = grad;
    double decrement = 0.0;
    for (std::size_t i = 0; i < n; ++i) decrement -= g[i] * d[i];
    if (grad <= prm.newton_tol || decrement <= 1e-16 * std::max(1.0, std::abs(value))) {
      out.converged = true;
      break;
    }

    double amax = 1.0;
    for (std::size_t i = 0; i < n; ++i)
      if (d[i] < 0.0) amax = std::min(amax, -z[i] / d[i]);
    double alpha = amax;
    std::vector<double> trial(n);
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = std::max(0.0, z[i] + alpha * d[i]);
      if (alpha == amax)
        for (std::size_t i = 0; i < n; ++i)
          if (d[i] < 0.0 && -z[i] / d[i] <= amax * (1 + 1e-12)) trial[i] = 0.0;
      const double m = P.mass(trial);
      for (double& v : trial) v /= m;
      const double tv = P.value(trial);
      if (tv <= value - 1e-4 * alpha * decrement) {
        accepted = true;
        value = tv;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // no representable decrease left
      out.converged = decrement <= 1e-14 * std::max(1.0, std::abs(value));
      break;
    }
    z.swap(trial);
  }
  return out;
}

}  // namespace

void SharpRunParams::validate(const CrossSection& s) const {
  if (time_step(s) > 0.4 * s.dy() * s.dy() * (1 + 1e-12))
    throw ConfigError("params", "time step must satisfy dt <= 0.4 dy^2");
  if (!(shape_tol > 0.0) || !(t_max > 0.0) || !(check_interval > 0.0))
    throw ConfigError("params", "tolerances and times must be positive");
  if (delta_schedule.empty()) throw ConfigError("params", "empty smoothing schedule");
  for (std::size_t k = 0; k < delta_schedule.size(); ++k) {
    if (!(delta_schedule[k] >= 1e-8)) throw ConfigError("params", "smoothing below 1e-8");
    if (k > 0 && !(delta_schedule[k] < delta_schedule[k - 1]))
      throw ConfigError("params", "smoothing schedule must decrease strictly");
  }
}

Profile step_fmc(const Profile& h, const SharpRunParams& params, const DoubleWell& well,
                 const Forcing& forcing) {
  require_balanced(well);
  if (h.any_masked()) throw ConfigError("profile", "graph flow needs a finite profile");
  params.validate(h.section);
  Profile out = h;
  std::vector<double> next(out.values.size());
  fmc_step_inplace(out.values, next, params.time_step(h.section), h.section.dy(),
                   params.gradient_limit, forcing_speed(forcing, well));
  return out;
}

SharpSpeedResult measure_speed_fmc(const Profile& initial, const SharpRunParams& params,
                                   const DoubleWell& well, const Forcing& forcing) {
  require_balanced(well);
  if (initial.any_masked()) throw ConfigError("profile", "graph flow needs a finite profile");
  params.validate(initial.section);
  const CrossSection& s = initial.section;
  const double dt = params.time_step(s);
  const int per_check = std::max(1, static_cast<int>(std::lround(params.check_interval / dt)));
  const double interval = per_check * dt;
  const std::vector<double> speed = forcing_speed(forcing, well);

  SharpSpeedResult res;
  std::vector<double> h = initial.values, next(h.size());
  const auto shape = [&] {
    std::vector<double> sh(h);
    const double mx = *std::max_element(h.begin(), h.end());
    for (double& v : sh) v -= mx;
    return sh;
  };
  std::vector<double> prev = shape();
  double t = 0.0;
  res.times.push_back(0.0);
  res.max_h.push_back(*std::max_element(h.begin(), h.end()));
  res.shape_drift.push_back(kNaN);
  while (t < params.t_max) {
    for (int k = 0; k < per_check; ++k) fmc_step_inplace(h, next, dt, s.dy(), params.gradient_limit, speed);
    t += interval;
    std::vector<double> cur = shape();
    double drift = 0.0;
    for (std::size_t i = 0; i < cur.size(); ++i) drift = std::max(drift, std::abs(cur[i] - prev[i]));
    drift /= interval;
    prev.swap(cur);
    res.times.push_back(t);
    res.max_h.push_back(*std::max_element(h.begin(), h.end()));
    res.shape_drift.push_back(drift);
    if (drift < params.shape_tol && res.times.size() > 6) {
      res.stationary = true;
      break;
    }
  }

  const std::size_t n = res.times.size();
  const std::size_t m = std::min<std::size_t>(n, 6);
  const std::span<const double> tt(res.times.data() + (n - m), m);
  const std::span<const double> hh(res.max_h.data() + (n - m), m);
  const num::LineFit fit = num::fit_line(tt, hh);
  SpeedResult& sp = res.speed;
  sp.c = fit.slope;
  sp.method = "graph-flow";
  sp.residual = fit.slope_stderr;
  sp.converged = res.stationary;
  sp.bracket_lo = sp.bracket_hi = fit.slope;
  sp.add("t_end", t);
  sp.add("shape_drift", res.shape_drift.back());
  sp.add("dt", dt);
  if (res.stationary) {
    res.psi = Profile(s);
    res.psi.values = prev;
  } else {
    sp.note = "shape not stationary at t_max (possible finger regime)";
  }
  return res;
}

GcMinimizerResult minimize_G_c(double c, const SharpRunParams& params, const DoubleWell& well,
                               const Forcing& forcing, const Profile* warm) {
  require_balanced(well);
  if (!(c > 0.0)) throw ConfigError("params", "speed must be positive");
  params.validate(forcing.section());
  const CrossSection& s = forcing.section();
  const std::size_t n = static_cast<std::size_t>(s.nodes);

  std::vector<double> z(n, 1.0 / s.length);
  if (warm && warm->size() == s.nodes) {
    for (std::size_t i = 0; i < n; ++i) z[i] = std::max(0.0, warm->values[i]);
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += s.weight(static_cast<int>(i)) * z[i];
    if (m > 0.0)
      for (double& v : z) v /= m;
    else
      std::fill(z.begin(), z.end(), 1.0 / s.length);
  }

  GcMinimizerResult res;
  std::vector<std::uint8_t> zero_everywhere;
  const auto run_schedule = [&](std::vector<double>& zz) {
    res = GcMinimizerResult{};
    res.c = c;
    zero_everywhere.assign(n, 1);
    bool ok = true;
    for (double delta : params.delta_schedule) {
      const GcProblem P(s, c, well.c_W(), delta, forcing);
      const NewtonOutcome o = newton_stage(P, zz, params);
      res.iterations += o.iterations;
      res.gradient_residual = o.gradient;
      ok = ok && o.converged;
      res.m_by_delta.push_back(P.value(zz));
      const double zmax = *std::max_element(zz.begin(), zz.end());
      for (std::size_t i = 0; i < n; ++i)
        if (zz[i] > params.finger_tol * zmax) zero_everywhere[i] = 0;
    }
    return ok;
  };
  bool all_converged = run_schedule(z);
  if (!all_converged && warm) {
    z.assign(n, 1.0 / s.length);
    all_converged = run_schedule(z);
  }
  if (!all_converged) {
    std::ostringstream msg;
    msg << "Newton did not converge at c = " << c << " (gradient " << res.gradient_residual << ")";
    throw NumericalError("non-convergence", msg.str());
  }
  const std::size_t k = res.m_by_delta.size();
  if (k >= 2) {
    const double d1 = params.delta_schedule[k - 2], d2 = params.delta_schedule[k - 1];
    const double m1 = res.m_by_delta[k - 2], m2 = res.m_by_delta[k - 1];
    res.m = (d1 * m2 - d2 * m1) / (d1 - d2);
  } else {
    res.m = res.m_by_delta.back();
  }
  res.zeta = Profile(s);
  res.zeta.values = z;
  double mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) mass += s.weight(static_cast<int>(i)) * z[i];
  res.constraint_defect = std::abs(mass - 1.0);
  res.support.assign(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    res.support[i] = zero_everywhere[i] ? 0 : 1;
    if (zero_everywhere[i]) res.fingers = true;
  }
  return res;
}

SharpCResult find_c_dagger(const SharpRunParams& params, const DoubleWell& well,
                           const Forcing& forcing) {
  require_balanced(well);
  const double cw = well.c_W();
  const double mean = forcing.g_mean() / cw, sup = forcing.g_max() / cw;
  if (!(sup > 0.0)) throw ConfigError("forcing", "sup g must be positive for a positive speed");
  const double pad = params.bracket_widen * std::abs(sup) + 1e-9;
  double lo = std::max(mean - pad, 1e-6 * sup);
  double hi = sup + pad;

  SharpCResult out;
  Profile warm(forcing.section(), 1.0 / forcing.section().length);
  const auto m_of = [&](double c) {
    GcMinimizerResult r = minimize_G_c(c, params, well, forcing, &warm);
    warm = r.zeta;
    out.m_samples.emplace_back(c, r.m);
    return r;
  };
  GcMinimizerResult r_lo = m_of(lo);
  GcMinimizerResult r_hi = m_of(hi);
  if (!(r_lo.m < 0.0) || !(r_hi.m > 0.0)) {
    std::ostringstream msg;
    msg << "m(" << lo << ") = " << r_lo.m << ", m(" << hi << ") = " << r_hi.m
        << "; expected a sign change";
    throw NumericalError("bracket", msg.str());
  }
  double m_lo = r_lo.m, m_hi = r_hi.m;
  int it = 0;
  for (; it < params.max_bisections && hi - lo >= params.tol_c; ++it) {
    // regula falsi step kept away from the ends, else bisection
    double trial = lo - m_lo * (hi - lo) / (m_hi - m_lo);
    const double w = hi - lo;
    if (!(trial > lo + 0.05 * w && trial < hi - 0.05 * w)) trial = 0.5 * (lo + hi);
    const GcMinimizerResult r = m_of(trial);
    if (r.m < 0.0) {
      lo = trial;
      m_lo = r.m;
    } else if (r.m > 0.0) {
      hi = trial;
      m_hi = r.m;
    } else {
      lo = hi = trial;
    }
  }
  const double c = 0.5 * (lo + hi);
  out.minimizer = minimize_G_c(c, params, well, forcing, &warm);
  out.psi = profile_from_zeta(out.minimizer.zeta, c);
  const double top = out.psi.max_unmasked();
  for (int i = 0; i < out.psi.size(); ++i)
    if (!out.psi.is_masked(i)) out.psi.values[i] -= top;
  SpeedResult& sp = out.speed;
  sp.c = c;
  sp.method = "G_c-sign-bisection";
  sp.bracket_lo = lo;
  sp.bracket_hi = hi;
  sp.residual = 0.5 * (hi - lo);
  sp.converged = hi - lo < params.tol_c || lo == hi;
  sp.add("m_at_c", out.minimizer.m);
  sp.add("bracket_mean", mean);
  sp.add("bracket_sup", sup);
  sp.add("evaluations", static_cast<double>(out.m_samples.size()));
  sp.add("fingers", out.minimizer.fingers ? 1.0 : 0.0);
  return out;
}

Profile profile_from_zeta(const Profile& zeta, double c, double threshold) {
  if (!(c > 0.0)) throw ConfigError("params", "speed must be positive");
  Profile psi(zeta.section);
  for (int i = 0; i < zeta.size(); ++i) {
    const double z = zeta.is_masked(i) ? 0.0 : zeta.values[i];
    if (z < 0.0) throw ConfigError("negative-zeta", "zeta must be nonnegative");
    if (z <= threshold) {
      psi.values[i] = 0.0;
      psi.masked[i] = 1;
    } else {
      psi.values[i] = std::log(c * z) / c;
    }
  }
  return psi;
}

EulerLagrangeReport check_euler_lagrange(const Profile& psi, double c, const DoubleWell& well,
                                         const Forcing& forcing, double el_tol) {
  require_balanced(well);
  const CrossSection& s = psi.section;
  const int n = s.nodes;
  const double h = s.dy();
  const double cw = well.c_W();
  EulerLagrangeReport r;
  r.dy = h;
  r.threshold = el_tol * h * h;
  const auto flux = [&](int i) {  // between i and i+1
    const double sl = (psi.values[i + 1] - psi.values[i]) / h;
    return sl / std::sqrt(1 + sl * sl);
  };
  for (int i = 1; i + 1 < n; ++i) {
    if (psi.is_masked(i - 1) || psi.is_masked(i) || psi.is_masked(i + 1)) continue;
    const double div = (flux(i) - flux(i - 1)) / h;
    const double d = (psi.values[i + 1] - psi.values[i - 1]) / (2 * h);
    const double res = -div - forcing.g(i) / cw + c / std::sqrt(1 + d * d);
    r.interior = std::max(r.interior, std::abs(res));
    ++r.evaluated;
  }
  if (!psi.is_masked(0) && !psi.is_masked(1)) {
    r.boundary = std::max(r.boundary, std::abs(-2 * flux(0) / h - forcing.g(0) / cw + c));
    ++r.evaluated;
    if (n >= 3 && !psi.is_masked(2))
      r.neumann = std::max(r.neumann,
                           std::abs((-3 * psi.values[0] + 4 * psi.values[1] - psi.values[2]) / (2 * h)));
  }
  if (!psi.is_masked(n - 1) && !psi.is_masked(n - 2)) {
    r.boundary = std::max(r.boundary, std::abs(2 * flux(n - 2) / h - forcing.g(n - 1) / cw + c));
    ++r.evaluated;
    if (n >= 3 && !psi.is_masked(n - 3))
      r.neumann = std::max(r.neumann, std::abs((3 * psi.values[n - 1] - 4 * psi.values[n - 2] +
                                                psi.values[n - 3]) / (2 * h)));
  }
  r.residual = std::max({r.interior, r.boundary, r.neumann});
  r.pass = r.evaluated > 0 && r.residual <= r.threshold;
  return r;
}

}  // namespace sfront
