// Acceptance criteria 1-8. One PASS/FAIL line per criterion; exit status 1
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sfront/diffuse.hpp"
#include "sfront/functionals.hpp"
#include "sfront/harness.hpp"
#include "sfront/numerics.hpp"
#include "sfront/sharp.hpp"

using namespace sfront;

namespace {

// pinned tolerances
constexpr double kFlatRelTol = 0.005;
constexpr double kFlatSeconds = 10.0;
constexpr double kAgreeRelTol = 0.01;
constexpr double kAgreeSeconds = 60.0;
constexpr double kMinOrder = 1.5;
constexpr double kExtrapRelTol = 0.01;
constexpr double kSweepSeconds = 1800.0;
constexpr double kHausdorffFactor = 5.0;
constexpr double kCubicRelTol = 0.02;
constexpr double kElMinSlope = 1.8;
constexpr double kStabilityRatio = 4.0;
constexpr double kStabilitySeconds = 1200.0;
constexpr double kMinExponent = 1.8;

const double kFlat = 6 * std::numbers::sqrt2 * 0.1;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("criterion %d: %s  %s: %s\n", id, pass ? "PASS" : "FAIL", what.c_str(), detail.c_str());
  std::fflush(stdout);
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

/// Wave speed of u'' + c u' + f(u) = 0 from 1 to 0 by shooting out of the
/// saddle at u = 1 and bisecting on whether the orbit crosses u = 0.
double shooting_speed(double alpha) {
  const auto f = [&](double u) { return u * (1 - u) * (u - alpha); };
  const double fp1 = -(1 - alpha);
  const auto crosses = [&](double c) {
    const double lam = 0.5 * (-c + std::sqrt(c * c - 4 * fp1));
    double u = 1.0 - 1e-7, p = -1e-7 * lam;
    const double h = 1e-3;
    for (int k = 0; k < 4000000; ++k) {
      const double k1u = p, k1p = -c * p - f(u);
      const double k2u = p + 0.5 * h * k1p, k2p = -c * k2u - f(u + 0.5 * h * k1u);
      const double k3u = p + 0.5 * h * k2p, k3p = -c * k3u - f(u + 0.5 * h * k2u);
      const double k4u = p + h * k3p, k4p = -c * k4u - f(u + h * k3u);
      u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
      p += h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
      if (u < 0.0) return true;
      if (p > 0.0) return false;
    }
    return false;
  };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (crosses(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void criterion_1() {
  const auto t0 = Clock::now();
  const DoubleWell well = DoubleWell::quartic();
  const CrossSection sec(1.0, 201);
  const Forcing F = build_forcing(ForcingDescriptor::constant(0.1), sec);
  const SharpCResult r = find_c_dagger(SharpRunParams{}, well, F);
  const double secs = seconds_since(t0);
  const double rel = std::abs(r.speed.c - kFlat) / kFlat;
  report(1, rel <= kFlatRelTol && secs < kFlatSeconds, "flat-front sharp speed",
         fmt("c = %.8f, 6 sqrt2 g = %.8f, rel err %.2e (tol %.1e), %.2f s (limit %.0f s)", r.speed.c,
             kFlat, rel, kFlatRelTol, secs, kFlatSeconds));
}

void criterion_2() {
  const auto t0 = Clock::now();
  const DoubleWell well = DoubleWell::quartic();
  const CrossSection sec(1.0, 201);
  const Forcing F = build_forcing(ForcingDescriptor::cosine(0.1, 0.5, 1.0), sec);
  SharpRunParams p;
  const SharpCResult var = find_c_dagger(p, well, F);
  const SharpSpeedResult dyn = measure_speed_fmc(Profile(sec, 0.0), p, well, F);
  const double secs = seconds_since(t0);
  const double lo = F.g_mean() / well.c_W(), hi = F.g_max() / well.c_W();
  const double rel = std::abs(var.speed.c - dyn.speed.c) / var.speed.c;
  const bool inside = var.speed.c >= lo - p.tol_c && var.speed.c <= hi + p.tol_c;
  report(2, dyn.stationary && rel <= kAgreeRelTol && inside && secs < kAgreeSeconds,
         "variational/dynamic sharp agreement",
         fmt("c_var = %.8f, c_dyn = %.8f, rel diff %.2e (tol %.0e), bracket [%.4f, %.4f] %s, %.2f s "
             "(limit %.0f s)",
             var.speed.c, dyn.speed.c, rel, kAgreeRelTol, lo, hi, inside ? "contains c" : "MISSES c",
             secs, kAgreeSeconds));
}

void criteria_3_4() {
  const auto t0 = Clock::now();
  SweepConfig cfg;
  cfg.workers = static_cast<int>(std::clamp(std::thread::hardware_concurrency(), 1u, 3u));
  SweepTable t;
  try {
    t = run_eps_sweep({0.1, 0.05, 0.025}, cfg);
  } catch (const std::exception& e) {
    report(3, false, "eps-convergence of c_eps", std::string("sweep failed: ") + e.what());
    report(4, false, "level-set convergence", "sweep failed");
    return;
  }
  const double secs = seconds_since(t0);
  bool rows_ok = true;
  std::ostringstream errs, haus;
  bool haus_ok = true;
  for (const SweepRow& r : t.rows) {
    rows_ok = rows_ok && r.ok;
    errs << fmt(" eps=%.3f err=%.3e", r.eps, r.speed_error);
    const bool ok = r.ok && r.hausdorff <= kHausdorffFactor * r.eps;
    haus_ok = haus_ok && ok;
    haus << fmt(" eps=%.3f dH=%.2e (bound %.3f, grid %.2e)%s", r.eps, r.hausdorff,
                kHausdorffFactor * r.eps, r.hausdorff_estimate, ok ? "" : " FAIL");
  }
  const double extrap_rel = std::abs(t.extrapolated - t.c_sharp) / t.c_sharp;
  report(3,
         rows_ok && t.errors_decreasing && t.order >= kMinOrder && extrap_rel <= kExtrapRelTol &&
             secs < kSweepSeconds,
         "eps-convergence of c_eps",
         fmt("c = %.8f;", t.c_sharp) + errs.str() +
             fmt("; decreasing %s, order %.3f (min %.1f), extrapolated %.8f rel %.2e (tol %.0e), "
                 "%.1f s (limit %.0f s)",
                 t.errors_decreasing ? "yes" : "no", t.order, kMinOrder, t.extrapolated, extrap_rel,
                 kExtrapRelTol, secs, kSweepSeconds));
  report(4, haus_ok, "level-set convergence", fmt("M = %.3f;", t.M) + haus.str());
}

void criterion_5() {
  const double alpha = 0.4;
  const double oracle = shooting_speed(alpha);
  const DoubleWell well = DoubleWell::cubic(alpha);
  const CrossSection sec(1.0, 5);
  const Forcing none = build_forcing(ForcingDescriptor::constant(0.0), sec);
  DiffuseRunParams p;
  p.eps = 1.0;
  p.dz = 0.1;
  p.dt_factor = 0.05;
  p.t_max = 150.0;
  const CylinderGrid grid(sec, -16.0, 16.0, 0.1);
  const Field u0 = Field::from_function(grid, [](double, double z) { return z < 0 ? 1.0 : 0.0; });
  try {
    const DynamicSpeedResult r = measure_speed_dynamic(u0, p, well, none);
    const double rel = std::abs(r.speed.c - oracle) / oracle;
    report(5, rel <= kCubicRelTol, "classical bistable front",
           fmt("measured %.6f, shooting oracle %.6f (closed form %.6f), rel err %.2e (tol %.0e)",
               r.speed.c, oracle, std::numbers::sqrt2 * (0.5 - alpha), rel, kCubicRelTol));
  } catch (const std::exception& e) {
    report(5, false, "classical bistable front", e.what());
  }
}

struct Suite {
  std::vector<std::string> failed;
  int checks = 0;
  void check(bool ok, const std::string& name) {
    ++checks;
    if (!ok) failed.push_back(name);
  }
};

void criterion_6(const DiffuseSpeedResult& wave, double eps) {
  Suite s;
  const DoubleWell well = DoubleWell::quartic();
  const CrossSection sec(1.0, 21);
  const Forcing F = build_forcing(ForcingDescriptor::cosine(0.1, 0.5, 1.0), sec);
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> U(0.0, 1.0);

  // translation covariance of Phi
  {
    const CrossSection ws = section_for_eps(1.0, 0.1);
    const Forcing wf = build_forcing(ForcingDescriptor::cosine(0.1, 0.5, 1.0), ws);
    const CylinderGrid g(ws, -3.0, 3.0, 0.025);
    const InterfaceProfile gamma(well);
    const Field u = Field::from_function(g, [&](double y, double z) { return gamma(-(z - 0.2 * std::cos(std::numbers::pi * y)) / 0.1); });
    const double c = 0.8, base = phi_c_eps(u, c, 0.1, well, wf).value;
    for (double a : {-1.5, 0.3, 2.0}) {
      Field v = u;
      v.grid.z_shift += a;
      const double moved = phi_c_eps(v, c, 0.1, well, wf).value;
      s.check(std::abs(moved - std::exp(c * a) * base) <= 1e-10 * std::abs(moved), "translation covariance");
    }
  }
  // isoperimetric inequality, equality on flat cuts
  {
    const CylinderGrid g(sec, -3.0, 3.0, 0.1);
    for (int trial = 0; trial < 200; ++trial) {
      DiscreteSet S(g);
      for (int i = 0; i < S.columns(); ++i) {
        const int top = static_cast<int>(U(rng) * (S.rows() - 1));
        const int gap = static_cast<int>(U(rng) * top);
        for (int j = 0; j < top; ++j) S.set(i, j, j < gap / 2 || j >= gap);
      }
      if (S.empty()) continue;
      const double c = 0.2 + 2 * U(rng);
      s.check(per_c(S, c) >= c * weighted_volume(S, c) * (1 - 1e-12), "isoperimetric inequality");
    }
    for (double z0 : {-1.0, 0.0, 1.5}) {
      const DiscreteSet flat = DiscreteSet::subgraph(g, Profile(sec, z0));
      s.check(std::abs(per_c(flat, 0.9) - 0.9 * weighted_volume(flat, 0.9)) <= 1e-12 * per_c(flat, 0.9),
              "flat-cut equality");
    }
  }
  // positive 1-homogeneity of G_c
  for (int trial = 0; trial < 100; ++trial) {
    Profile z(sec);
    for (double& v : z.values) v = U(rng);
    const double c = 0.5 + U(rng);
    const double base = energy_G_c(z, c, well, F);
    for (double lambda : {0.5, 2.0, 10.0, 1e3}) {
      Profile w = z;
      for (double& v : w.values) v *= lambda;
      s.check(std::abs(energy_G_c(w, c, well, F) - lambda * base) <= 1e-12 * lambda * (1 + std::abs(base)),
              "G_c homogeneity");
    }
  }
  // rearrangement does not increase F_c
  {
    const CylinderGrid g(sec, -3.0, 3.0, 0.2);
    std::bernoulli_distribution coin(0.4);
    for (int trial = 0; trial < 100; ++trial) {
      DiscreteSet S(g);
      for (int i = 0; i < S.columns(); ++i)
        for (int j = 0; j + 1 < S.rows(); ++j) S.set(i, j, coin(rng));
      const double c = 0.5 + U(rng);
      s.check(fgeo_subgraph(rearrange_subgraph(S, c), c, well, F) <= fgeo_c(S, c, well, F) + 1e-12,
              "rearrangement monotonicity");
    }
  }
  // monotone-in-z wave profile with range (0, 1 + C eps]
  {
    const Field& u = wave.profile;
    bool monotone = true, range = true;
    for (int j = 0; j + 1 < u.grid.nz; ++j)
      for (int i = 0; i < u.grid.ny(); ++i) monotone = monotone && u.at(i, j + 1) <= u.at(i, j);
    for (double v : u.u) range = range && v > 0.0 && v <= 1.0 + eps;
    s.check(monotone, "monotone wave profile");
    s.check(range, "wave profile range");
  }
  // comparison principle for the graph flow
  {
    const CrossSection cs(1.0, 41);
    const Forcing cf = build_forcing(ForcingDescriptor::cosine(0.1, 0.5, 1.0), cs);
    SharpRunParams p;
    for (int trial = 0; trial < 8; ++trial) {
      // ordered constants, then smooth data with |h_y| <= 1
      Profile a(cs, 0.0), b(cs, 0.1);
      if (trial > 0) {
        const double c1 = 0.1 * (U(rng) - 0.5), c2 = 0.05 * (U(rng) - 0.5), c3 = 0.02 * (U(rng) - 0.5);
        const double d0 = trial == 1 ? 1e-9 : 0.05 * U(rng), d1 = 0.5 * d0 * U(rng);
        for (int i = 0; i < cs.nodes; ++i) {
          const double y = std::numbers::pi * cs.y(i);
          a.values[i] = c1 * std::cos(y) + c2 * std::cos(2 * y) + c3 * std::cos(3 * y);
          b.values[i] = a.values[i] + d0 + d1 * std::cos(y);
        }
      }
      bool ordered = true;
      for (int k = 0; k < 5000 && ordered; ++k) {
        a = step_fmc(a, p, well, cf);
        b = step_fmc(b, p, well, cf);
        for (int i = 0; i < cs.nodes; ++i) ordered = ordered && a.values[i] <= b.values[i];
      }
      s.check(ordered, "comparison principle");
    }
  }
  // F_c / G_c change of variables, second order in dy
  {
    std::vector<double> diffs;
    for (int n : {51, 101, 201, 401}) {
      const CrossSection cs(1.0, n);
      const Forcing cf = build_forcing(ForcingDescriptor::cosine(0.1, 0.5, 1.0), cs);
      const Profile psi = Profile::from_function(cs, [](double y) { return 0.3 * std::cos(std::numbers::pi * y) + 0.1 * y * y; });
      Profile zeta(cs);
      for (int i = 0; i < n; ++i) zeta.values[i] = std::exp(0.95 * psi.values[i]) / 0.95;
      diffs.push_back(std::abs(energy_F_c(psi, 0.95, well, cf) - energy_G_c(zeta, 0.95, well, cf)));
    }
    s.check(diffs.back() <= 1e-6, "F_c/G_c identity");
    for (std::size_t k = 1; k < diffs.size(); ++k)
      s.check(std::log2(diffs[k - 1] / diffs[k]) >= 1.8, "F_c/G_c identity order");
  }
  // Euler-Lagrange residual of the graph-flow profile under refinement
  std::string el_detail;
  {
    std::vector<double> ldy, lres;
    for (int n : {26, 51, 101, 201}) {
      const CrossSection cs(1.0, n);
      const Forcing cf = build_forcing(ForcingDescriptor::cosine(0.1, 0.5, 1.0), cs);
      SharpRunParams p;
      p.shape_tol = 1e-11;
      p.t_max = 200.0;
      const SharpSpeedResult r = measure_speed_fmc(Profile(cs, 0.0), p, well, cf);
      s.check(r.stationary, "graph flow stationary");
      if (!r.stationary) continue;
      const EulerLagrangeReport el = check_euler_lagrange(r.psi, r.speed.c, well, cf);
      s.check(el.pass, "Euler-Lagrange threshold");
      ldy.push_back(std::log(cs.dy()));
      lres.push_back(std::log(el.residual));
    }
    const double slope = ldy.size() >= 2 ? num::fit_line(ldy, lres).slope : 0.0;
    s.check(slope >= kElMinSlope, "Euler-Lagrange refinement slope");
    el_detail = fmt("EL slope %.3f (min %.1f)", slope, kElMinSlope);
  }

  std::string detail = fmt("%d checks, %zu failed; ", s.checks, s.failed.size()) + el_detail;
  for (const auto& f : s.failed) detail += "; failed: " + f;
  report(6, s.failed.empty(), "property suites", detail);
}

void criterion_7() {
  const auto t0 = Clock::now();
  StabilityConfig cfg;
  const InitialDatum step{InitialDatum::Kind::step_cosine, 1.0, 1.0, 1.0, "step"};
  try {
    const StabilityReport a = stability_experiment(0.05, {step}, cfg);
    const StabilityReport b = stability_experiment(0.025, {step}, cfg);
    const double secs = seconds_since(t0);
    const StabilityRun& ra = a.runs.front();
    const StabilityRun& rb = b.runs.front();
    const double ratio = ra.initial / ra.plateau;
    report(7,
           ra.plateau_reached && ratio >= kStabilityRatio && rb.plateau < ra.plateau &&
               secs < kStabilitySeconds,
           "stability of the wave",
           fmt("eps=0.05: L1 %.4f -> %.4f (ratio %.2f, min %.0f, plateau %s); eps=0.025: plateau "
               "%.4f (%s, plateau %s); %.1f s (limit %.0f s)",
               ra.initial, ra.plateau, ratio, kStabilityRatio, ra.plateau_reached ? "reached" : "not reached",
               rb.plateau, rb.plateau < ra.plateau ? "decreased" : "NOT decreased",
               rb.plateau_reached ? "reached" : "not reached", secs, kStabilitySeconds));
  } catch (const std::exception& e) {
    report(7, false, "stability of the wave", e.what());
  }
}

void criterion_8(const DiffuseSpeedResult& wave, double eps) {
  const Field u = stretch(wave.profile, eps);
  const std::vector<Point> centers = interface_centers(u, 0.5, 5);
  if (centers.empty()) {
    report(8, false, "density audits", "no interface");
    return;
  }
  try {
    const double alpha = fit_alpha(u, centers, 2);
    const DensityAudit L2 = density_audit_L2(u, centers, alpha, 2, 10);
    const LevelSetAudit ls = density_audit_levelset(u, 0.5, {1, 2, 4, 8}, centers[centers.size() / 2]);
    report(8, L2.pass && ls.pass && alpha > 0.0, "density audits",
           fmt("level-set exponent %.3f (min %.1f), C %.3f; L2 at fitted alpha %.4f over %zu centers, "
               "r0 = 2, R0 = 10: %s",
               ls.exponent, kMinExponent, ls.C, alpha, centers.size(), L2.pass ? "pass" : "fail"));
  } catch (const std::exception& e) {
    report(8, false, "density audits", e.what());
  }
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criteria_3_4();
  criterion_5();

  const double eps = 0.05;
  const DoubleWell well = DoubleWell::quartic();
  const CrossSection sec = section_for_eps(1.0, eps);
  const Forcing F = build_forcing(ForcingDescriptor::constant(0.1), sec);
  DiffuseRunParams p;
  p.eps = eps;
  const DiffuseSpeedResult wave = find_c_dagger_eps(p, well, F);

  criterion_6(wave, eps);
  criterion_7();
  criterion_8(wave, eps);

  std::printf("acceptance: %d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
