#include "sfront/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "sfront/error.hpp"
#include "sfront/functionals.hpp"
#include "sfront/numerics.hpp"

namespace sfront {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Seg {
  double y0, z0, y1, z1;
};

double point_segment_distance(double y, double z, const Seg& s) {
  const double dy = s.y1 - s.y0, dz = s.z1 - s.z0;
  const double len2 = dy * dy + dz * dz;
  double t = len2 > 0.0 ? ((y - s.y0) * dy + (z - s.z0) * dz) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(y - (s.y0 + t * dy), z - (s.z0 + t * dz));
}

/// Clips a segment to lo <= z <= hi; false if nothing is left.
bool clip_segment(Seg& s, double lo, double hi) {
  double t0 = 0.0, t1 = 1.0;
  const double dz = s.z1 - s.z0;
  const auto bound = [&](double p, double q) {
    if (p == 0.0) return q >= 0.0;
    const double r = q / p;
    if (p < 0.0) t0 = std::max(t0, r);
    else t1 = std::min(t1, r);
    return t0 <= t1;
  };
  if (!bound(-dz, s.z0 - lo) || !bound(dz, hi - s.z0)) return false;
  const Seg o = s;
  s = {o.y0 + t0 * (o.y1 - o.y0), o.z0 + t0 * dz, o.y0 + t1 * (o.y1 - o.y0), o.z0 + t1 * dz};
  return true;
}

std::vector<Seg> level_segments(const Field& u, double theta) {
  const CylinderGrid& g = u.grid;
  std::vector<Seg> out;
  for (int j = 0; j + 1 < g.nz; ++j) {
    for (int i = 0; i + 1 < g.ny(); ++i) {
      // corners counter-clockwise
      const double y[4] = {g.y(i), g.y(i + 1), g.y(i + 1), g.y(i)};
      const double z[4] = {g.z(j), g.z(j), g.z(j + 1), g.z(j + 1)};
      const double v[4] = {u.at(i, j) - theta, u.at(i + 1, j) - theta,
                           u.at(i + 1, j + 1) - theta, u.at(i, j + 1) - theta};
      double py[4], pz[4];
      int n = 0;
      for (int e = 0; e < 4; ++e) {
        const int a = e, b = (e + 1) % 4;
        if ((v[a] < 0.0) != (v[b] < 0.0)) {
          const double t = v[a] / (v[a] - v[b]);
          py[n] = y[a] + t * (y[b] - y[a]);
          pz[n] = z[a] + t * (z[b] - z[a]);
          ++n;
        }
      }
      if (n >= 2) out.push_back({py[0], pz[0], py[1], pz[1]});
      if (n == 4) out.push_back({py[2], pz[2], py[3], pz[3]});
    }
  }
  return out;
}

std::vector<Seg> graph_segments(const Profile& psi, double below) {
  const CrossSection& s = psi.section;
  std::vector<Seg> out;
  const auto val = [&](int i) { return psi.is_masked(i) ? below : psi.values[i]; };
  for (int i = 0; i + 1 < s.nodes; ++i) out.push_back({s.y(i), val(i), s.y(i + 1), val(i + 1)});
  return out;
}

double directed(const std::vector<Seg>& from, const std::vector<Seg>& to) {
  constexpr int samples = 8;
  double worst = 0.0;
  for (const Seg& a : from) {
    for (int k = 0; k <= samples; ++k) {
      const double t = static_cast<double>(k) / samples;
      const double y = a.y0 + t * (a.y1 - a.y0), z = a.z0 + t * (a.z1 - a.z0);
      double best = kInf;
      for (const Seg& b : to) best = std::min(best, point_segment_distance(y, z, b));
      worst = std::max(worst, best);
    }
  }
  return worst;
}

/// u(y_i, z) along column i, constant beyond the window ends.
double column_value(const Field& u, int i, double z) {
  const CylinderGrid& g = u.grid;
  const double s = (z - g.z(0)) / g.dz;
  if (s <= 0.0) return u.at(i, 0);
  if (s >= g.nz - 1) return u.at(i, g.nz - 1);
  const int j = std::min(static_cast<int>(s), g.nz - 2);
  const double t = s - j;
  return (1 - t) * u.at(i, j) + t * u.at(i, j + 1);
}

double abs_linear_integral(double fa, double fb, double width) {
  if ((fa >= 0.0) == (fb >= 0.0)) return 0.5 * (std::abs(fa) + std::abs(fb)) * width;
  return 0.5 * (fa * fa + fb * fb) / std::abs(fa - fb) * width;
}

void throw_unless_front_like(const Field& u, double band) {
  const CylinderGrid& g = u.grid;
  for (double x : u.u)
    if (!(x >= -1e-12 && x <= 1.0 + band + 1e-12))
      throw ConfigError("not-front-like", "initial datum leaves [0, 1 + delta]");
  for (int i = 0; i < g.ny(); ++i) {
    if (u.at(i, 0) < 1.0 - band)
      throw ConfigError("not-front-like", "initial datum is not close to 1 at the bottom");
    if (u.at(i, g.nz - 1) > band)
      throw ConfigError("not-front-like", "initial datum is not close to 0 at the top");
  }
}

/// Keeps the leading edge at least `margin` below the top of the window.
void keep_front_inside(Field& u, double margin) {
  const CylinderGrid& g = u.grid;
  const double top = g.z(g.nz - 1);
  const double front = leading_edge(u, 0.5);
  if (front > top - margin) {
    const int k = static_cast<int>(std::ceil((front - (top - 2 * margin)) / g.dz));
    shift_window(u, k);
  }
}

struct BallSampler {
  const Field& u;
  Point p;
  double R;

  template <class Fn>
  void each(Fn&& fn) const {
    const CylinderGrid& g = u.grid;
    if (p.z - R < g.z(0) - 1e-12 || p.z + R > g.z(g.nz - 1) + 1e-12)
      throw ConfigError("ball-outside-window", "ball leaves the axial window");
    const double h = std::max(g.dy(), g.dz);
    const int sub = std::clamp(static_cast<int>(std::ceil(16.0 * h / R)), 1, 16);
    const int i0 = std::max(0, static_cast<int>(std::floor((p.y - R) / g.dy())));
    const int i1 = std::min(g.ny() - 1, static_cast<int>(std::ceil((p.y + R) / g.dy())));
    const int j0 = std::max(0, static_cast<int>(std::floor((p.z - R - g.z(0)) / g.dz)));
    const int j1 = std::min(g.nz - 1, static_cast<int>(std::ceil((p.z + R - g.z(0)) / g.dz)));
    const double wy = g.dy() / sub, wz = g.dz / sub;
    for (int j = j0; j < j1; ++j) {
      for (int i = i0; i < i1; ++i) {
        const double a = u.at(i, j), b = u.at(i + 1, j), c = u.at(i, j + 1),
                     d = u.at(i + 1, j + 1);
        for (int sj = 0; sj < sub; ++sj) {
          const double tz = (sj + 0.5) / sub;
          const double z = g.z(j) + tz * g.dz;
          for (int si = 0; si < sub; ++si) {
            const double ty = (si + 0.5) / sub;
            const double y = g.y(i) + ty * g.dy();
            if ((y - p.y) * (y - p.y) + (z - p.z) * (z - p.z) > R * R) continue;
            const double v =
                (1 - tz) * ((1 - ty) * a + ty * b) + tz * ((1 - ty) * c + ty * d);
            fn(v, wy * wz);
          }
        }
      }
    }
  }
};

double sq(double u) { return u * u; }
double sq_complement(double u) { return (1 - u) * (1 - u); }

}  // namespace

// ---------------------------------------------------------------------------
// Level sets

double default_window(const Profile& psi) {
  bool any = false;
  for (int i = 0; i < psi.size(); ++i) any = any || !psi.is_masked(i);
  if (!any) return 2.0;
  return 2.0 + psi.max_unmasked() - psi.min_unmasked();
}

double psi_at(const Profile& psi, double y) {
  const CrossSection& s = psi.section;
  const double x = std::clamp(y / s.dy(), 0.0, static_cast<double>(s.nodes - 1));
  const int i = std::min(static_cast<int>(x), s.nodes - 2);
  const double t = x - i;
  if ((t < 1.0 && psi.is_masked(i)) || (t > 0.0 && psi.is_masked(i + 1))) return -kInf;
  return (1 - t) * psi.values[i] + t * psi.values[i + 1];
}

double hausdorff_level_set(const Field& u, double theta, const Profile& psi, double M) {
  if (!(M > 0.0)) throw ConfigError("params", "window half-height must be positive");
  std::vector<Seg> level;
  for (Seg s : level_segments(u, theta))
    if (clip_segment(s, -M, M)) level.push_back(s);
  if (level.empty()) throw Error("empty-level-set", "no level-set segment inside Sigma_M");
  std::vector<Seg> graph;
  for (Seg s : graph_segments(psi, -2.0 * M))
    if (clip_segment(s, -M, M)) graph.push_back(s);
  if (graph.empty()) throw Error("empty-level-set", "graph of psi lies outside Sigma_M");
  return std::max(directed(level, graph), directed(graph, level));
}

// ---------------------------------------------------------------------------
// Sweep

SweepTable run_eps_sweep(std::vector<double> eps_list, const SweepConfig& config) {
  if (eps_list.empty()) throw ConfigError("params", "empty eps list");
  for (double e : eps_list)
    if (!(e > 0.0)) throw ConfigError("params", "eps must be positive");
  std::sort(eps_list.begin(), eps_list.end(), std::greater<>());
  if (std::adjacent_find(eps_list.begin(), eps_list.end()) != eps_list.end())
    throw ConfigError("params", "eps values must be distinct");

  SweepTable table;
  const CrossSection sharp_section(config.length, config.sharp_nodes);
  const Forcing sharp_forcing = build_forcing(config.forcing, sharp_section);
  table.h4 = check_h4(config.well, sharp_forcing);
  if (table.h4.verdict != Verdict::holds)
    throw ConfigError("assumption", "the forcing does not satisfy the existence assumption");
  try {
    table.h6 = check_h6_sufficient(config.well, sharp_forcing);
  } catch (const ConfigError& e) {
    table.h6.assumption = "H6";
    table.h6.verdict = Verdict::undetermined;
    table.h6.notes.push_back(e.what());
  }
  table.single_limit = table.h6.verdict == Verdict::holds;

  const SharpCResult sharp = find_c_dagger(config.sharp, config.well, sharp_forcing);
  table.c_sharp = sharp.speed.c;
  table.psi = sharp.psi;
  table.M = default_window(table.psi);

  table.rows.resize(eps_list.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < eps_list.size(); k = next++) {
      SweepRow& row = table.rows[k];
      row.eps = eps_list[k];
      row.dynamic_speed = kNaN;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        DiffuseRunParams p = config.diffuse;
        p.eps = row.eps;
        p.cross_check = config.dynamic;
        const CrossSection section = section_for_eps(config.length, row.eps);
        const Forcing forcing = build_forcing(config.forcing, section);
        const DiffuseSpeedResult r = find_c_dagger_eps(p, config.well, forcing);
        row.c_eps = r.speed.c;
        row.dynamic_speed = r.dynamic_speed;
        row.speed_error = std::abs(row.c_eps - table.c_sharp);
        Field u = r.profile;
        u.grid.z_shift -= leading_edge(u, 0.5);
        row.hausdorff = hausdorff_level_set(u, 0.5, table.psi, table.M);
        row.hausdorff_estimate = std::max(u.grid.dy(), u.grid.dz);
        const EquilibriumResult v =
            find_equilibrium_v(row.eps, config.well, forcing, Profile(section, 1.0));
        double d = 0.0;
        for (double x : v.v.values) d = std::max(d, std::abs(x - 1.0));
        row.v_defect = d;
      } catch (const Error& e) {
        row.ok = false;
        row.error_code = e.code();
        row.message = e.what();
      }
      row.wall_clock =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  };
  const int workers = std::clamp(config.workers, 1, static_cast<int>(eps_list.size()));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<const SweepRow*> good;
  for (const SweepRow& r : table.rows)
    if (r.ok) good.push_back(&r);
  table.errors_decreasing = good.size() == table.rows.size() && good.size() >= 2;
  for (std::size_t k = 1; k < good.size(); ++k)
    if (!(good[k]->speed_error < good[k - 1]->speed_error)) table.errors_decreasing = false;
  table.order = kNaN;
  table.extrapolated = kNaN;
  if (good.size() >= 2) {
    const std::size_t first = good.size() >= 3 ? good.size() - 3 : 0;
    std::vector<double> le, lerr, e2, c;
    for (std::size_t k = first; k < good.size(); ++k) {
      e2.push_back(good[k]->eps * good[k]->eps);
      c.push_back(good[k]->c_eps);
      if (good[k]->speed_error > 0.0) {
        le.push_back(std::log(good[k]->eps));
        lerr.push_back(std::log(good[k]->speed_error));
      }
    }
    if (le.size() >= 2) table.order = num::fit_line(le, lerr).slope;
    table.extrapolated = num::fit_line(e2, c).intercept;
  }
  return table;
}

// ---------------------------------------------------------------------------
// Stability

Field make_initial(const InitialDatum& d, const CylinderGrid& grid, double eps,
                   const DoubleWell& well) {
  const double L = grid.section.length;
  const auto front = [&](double y) { return d.amplitude * std::cos(std::numbers::pi * y / L); };
  if (d.kind == InitialDatum::Kind::step_cosine)
    return Field::from_function(grid, [&](double y, double z) { return z < front(y) ? d.level : 0.0; });
  if (!(d.width > 0.0)) throw ConfigError("params", "transition width must be positive");
  const InterfaceProfile gamma(well);
  return Field::from_function(
      grid, [&](double y, double z) { return d.level * gamma((front(y) - z) / (d.width * eps)); });
}

double aligned_l1(const Field& u, double shift, const Profile& psi, double M) {
  const CylinderGrid& g = u.grid;
  double total = 0.0;
  std::vector<double> cuts;
  for (int i = 0; i < g.ny(); ++i) {
    const double p = psi_at(psi, g.y(i));
    cuts.assign({-M, M});
    if (p > -M && p < M) cuts.push_back(p);
    for (int j = 0; j < g.nz; ++j) {
      const double z = g.z(j) - shift;
      if (z > -M && z < M) cuts.push_back(z);
    }
    std::sort(cuts.begin(), cuts.end());
    double col = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double a = cuts[k], b = cuts[k + 1];
      if (!(b > a)) continue;
      const double chi = 0.5 * (a + b) < p ? 1.0 : 0.0;
      col += abs_linear_integral(column_value(u, i, a + shift) - chi,
                                 column_value(u, i, b + shift) - chi, b - a);
    }
    total += g.section.weight(i) * col;
  }
  return total;
}

StabilityReport stability_experiment(double eps, const std::vector<InitialDatum>& data,
                                     const StabilityConfig& config) {
  if (!(eps > 0.0)) throw ConfigError("params", "eps must be positive");
  if (data.empty()) throw ConfigError("params", "no initial data");
  if (config.times.size() < 2 || !std::is_sorted(config.times.begin(), config.times.end()))
    throw ConfigError("params", "need at least two increasing sample times");

  StabilityReport rep;
  rep.eps = eps;
  DiffuseRunParams p = config.diffuse;
  p.eps = eps;
  if (!(p.dz > 0.0)) p.dz = eps / 4.0;
  const CrossSection section = section_for_eps(config.length, eps);
  const Forcing forcing = build_forcing(config.forcing, section);
  rep.frame_speed = config.frame_speed > 0.0
                        ? config.frame_speed
                        : find_c_dagger_eps(p, config.well, forcing).speed.c;

  const CrossSection sharp_section(config.length, config.sharp_nodes);
  const Forcing sharp_forcing = build_forcing(config.forcing, sharp_section);
  rep.psi = find_c_dagger(config.sharp, config.well, sharp_forcing).psi;
  rep.M = default_window(rep.psi);
  rep.sigma_measure = config.length * 2.0 * rep.M;
  rep.l1_estimate = config.length * p.dz * p.dz / eps;

  double amp = 0.0;
  for (const InitialDatum& d : data) amp = std::max(amp, std::abs(d.amplitude));
  const CylinderGrid grid(section, -amp - p.window_below * eps, amp + p.window_above * eps, p.dz);
  p.validate(grid);
  const double top_lo = rep.psi.max_unmasked();

  for (const InitialDatum& d : data) {
    StabilityRun run;
    run.label = d.label;
    Field u = make_initial(d, grid, eps, config.well);
    throw_unless_front_like(u, config.band_delta);
    RdStepper stepper(grid, p, config.well, forcing, rep.frame_speed);
    long done = 0;
    for (double t : config.times) {
      const long target = std::lround(t / stepper.dt());
      for (; done < target; ++done) {
        stepper.step(u);
        keep_front_inside(u, 8.0 * eps);
      }
      u.t = done * stepper.dt();
      run.times.push_back(u.t);
      run.snapshots.push_back(u);
    }
    run.r_inf = leading_edge(run.snapshots.back(), 0.5) - top_lo;
    for (const Field& f : run.snapshots) run.l1.push_back(aligned_l1(f, run.r_inf, rep.psi, rep.M));
    run.initial = run.l1.front();
    run.plateau = run.l1.back();
    const double prev = run.l1[run.l1.size() - 2];
    run.plateau_reached = std::abs(run.plateau - prev) <= config.plateau_tol * run.plateau;
    rep.runs.push_back(std::move(run));
  }

  // aligned final shapes against the first datum
  const StabilityRun& ref = rep.runs.front();
  const Field& a = ref.snapshots.back();
  for (std::size_t k = 1; k < rep.runs.size(); ++k) {
    const Field& b = rep.runs[k].snapshots.back();
    const double h = 0.25 * p.dz;
    const int n = static_cast<int>(std::ceil(2.0 * rep.M / h));
    double diff = 0.0;
    for (int i = 0; i < section.nodes; ++i) {
      double col = 0.0;
      for (int m = 0; m <= n; ++m) {
        const double z = -rep.M + 2.0 * rep.M * m / n;
        const double w = (m == 0 || m == n) ? 0.5 : 1.0;
        col += w * std::abs(column_value(a, i, z + ref.r_inf) -
                            column_value(b, i, z + rep.runs[k].r_inf));
      }
      diff += section.weight(i) * col * 2.0 * rep.M / n;
    }
    rep.shape_spread = std::max(rep.shape_spread, diff);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Density audits

Field stretch(const Field& u, double eps) {
  if (!(eps > 0.0)) throw ConfigError("params", "eps must be positive");
  Field out = u;
  CylinderGrid& g = out.grid;
  g.section = CrossSection(u.grid.section.length / eps, u.grid.section.nodes);
  g.z_min = u.grid.z_min / eps;
  g.dz = u.grid.dz / eps;
  g.z_shift = u.grid.z_shift / eps;
  return out;
}

std::vector<Point> interface_centers(const Field& u, double theta, int count) {
  if (count < 1) throw ConfigError("params", "need at least one center");
  const CylinderGrid& g = u.grid;
  std::vector<Point> out;
  for (int k = 0; k < count; ++k) {
    const int i = static_cast<int>(std::lround((k + 1.0) * (g.ny() - 1) / (count + 1.0)));
    for (int j = g.nz - 2; j >= 0; --j) {
      const double a = u.at(i, j), b = u.at(i, j + 1);
      if (a > theta && b <= theta) {
        out.push_back({g.y(i), g.z(j) + (a - theta) / (a - b) * g.dz});
        break;
      }
    }
  }
  return out;
}

double ball_average(const Field& u, Point p, double R, double (*fn)(double)) {
  if (!(R > 0.0)) throw ConfigError("params", "radius must be positive");
  double sum = 0.0, area = 0.0;
  BallSampler{u, p, R}.each([&](double v, double w) {
    sum += w * fn(v);
    area += w;
  });
  if (!(area > 0.0)) throw ConfigError("ball-outside-window", "ball misses the cylinder");
  return sum / area;
}

double fit_alpha(const Field& u, const std::vector<Point>& centers, int r0) {
  if (centers.empty()) throw ConfigError("params", "no centers");
  double a = kInf;
  for (const Point& c : centers)
    a = std::min({a, ball_average(u, c, r0, sq), ball_average(u, c, r0, sq_complement)});
  return a;
}

DensityAudit density_audit_L2(const Field& u, const std::vector<Point>& centers, double alpha,
                              int r0, int R0) {
  if (r0 < 1 || R0 < r0 + 1) throw ConfigError("params", "need integers 1 <= r0 < r0 + 1 <= R0");
  DensityAudit a;
  a.centers = centers;
  a.alpha = alpha;
  for (int R = r0; R <= R0; ++R) a.radii.push_back(R);
  a.pass = true;
  a.alpha_achieved = kInf;
  for (const Point& c : centers) {
    std::vector<double> m2, m1;
    for (int R : a.radii) {
      m2.push_back(ball_average(u, c, R, sq));
      m1.push_back(ball_average(u, c, R, sq_complement));
    }
    const bool pre2 = m2.front() >= alpha, pre1 = m1.front() >= alpha;
    a.applies.push_back(pre2 || pre1);
    const double min2 = *std::min_element(m2.begin(), m2.end());
    const double min1 = *std::min_element(m1.begin(), m1.end());
    if ((pre2 && min2 < alpha) || (pre1 && min1 < alpha)) a.pass = false;
    a.alpha_achieved = std::min({a.alpha_achieved, min2, min1});
    a.mean_u2.push_back(std::move(m2));
    a.mean_1mu2.push_back(std::move(m1));
  }
  if (centers.empty()) a.alpha_achieved = kNaN;
  return a;
}

LevelSetAudit density_audit_levelset(const Field& u, double beta, const std::vector<double>& radii,
                                     Point center) {
  if (radii.size() < 2) throw ConfigError("params", "need at least two radii");
  const auto measure = [&](double R) {
    double mu = 0.0;
    BallSampler{u, center, R}.each([&](double v, double w) {
      if (std::abs(v) > beta) mu += w;
    });
    return mu;
  };
  if (!(measure(1.0) > 0.0))
    throw Error("precondition-empty", "|{|u| > beta} cap B(center, 1)| = 0");
  LevelSetAudit a;
  a.beta = beta;
  a.center = center;
  a.radii = radii;
  std::vector<double> lr, lm;
  a.C = kInf;
  for (double R : radii) {
    const double mu = measure(R);
    a.mu.push_back(mu);
    a.C = std::min(a.C, mu / (R * R));
    lr.push_back(std::log(R));
    lm.push_back(std::log(std::max(mu, std::numeric_limits<double>::min())));
  }
  a.exponent = num::fit_line(lr, lm).slope;
  a.pass = a.exponent >= 1.8;
  return a;
}

}  // namespace sfront
