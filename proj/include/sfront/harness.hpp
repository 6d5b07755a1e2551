#pragma once

// Experiments that compare the diffuse and sharp models: the eps sweep,
// the long-time stability run and the density audits.

#include <string>
#include <vector>

#include "sfront/conditions.hpp"
#include "sfront/diffuse.hpp"
#include "sfront/model.hpp"
#include "sfront/sharp.hpp"

namespace sfront {

struct SweepConfig {
  DoubleWell well = DoubleWell::quartic();
  ForcingDescriptor forcing = ForcingDescriptor::constant(0.1);
  double length = 1.0;
  int sharp_nodes = 201;
  DiffuseRunParams diffuse;
  SharpRunParams sharp;
  bool dynamic = true;  ///< also measure the lab-frame speed of each profile
  int workers = 1;
};

struct SweepRow {
  double eps = 0.0;
  double c_eps = 0.0;
  double dynamic_speed = 0.0;  ///< NaN when not measured
  double speed_error = 0.0;    ///< |c_eps - c|
  double hausdorff = 0.0;      ///< level set {u = 1/2} against the graph of psi in Sigma_M
  double hausdorff_estimate = 0.0;  ///< grid resolution of the extraction
  double v_defect = 0.0;            ///< sup |v_eps - 1|
  double wall_clock = 0.0;          ///< seconds; not part of the CSV
  bool ok = true;
  std::string error_code;
  std::string message;
};

struct SweepTable {
  std::vector<SweepRow> rows;  ///< eps strictly decreasing
  double c_sharp = 0.0;
  Profile psi;
  double M = 0.0;
  bool errors_decreasing = false;
  double order = 0.0;         ///< log-log slope of |c_eps - c| over the last three rows
  double extrapolated = 0.0;  ///< c_eps = c0 + K eps^2 least squares over the last three rows
  AssumptionReport h4;
  AssumptionReport h6;
  bool single_limit = true;  ///< false when uniqueness is undetermined
};

/// Throws ConfigError("assumption") unless check_h4 holds. Failed rows are
/// marked and the sweep continues; rows run in parallel up to `workers`.
SweepTable run_eps_sweep(std::vector<double> eps_list, const SweepConfig& config);

/// Window half-height 2 + sup psi - inf psi (masked nodes ignored).
double default_window(const Profile& psi);

/// Symmetric Hausdorff distance between the polyline {u = theta} and the
/// graph of psi, both clipped to |z| < M. Masked nodes of psi are sent below
/// the window. Throws Error("empty-level-set").
double hausdorff_level_set(const Field& u, double theta, const Profile& psi, double M);

/// Linear interpolation of psi; -infinity inside masked cells.
double psi_at(const Profile& psi, double y);

struct InitialDatum {
  enum class Kind { step_cosine, smooth_cosine };
  Kind kind = Kind::step_cosine;
  double amplitude = 1.0;  ///< front at z = amplitude * cos(pi y / L)
  double level = 1.0;      ///< value behind the front
  double width = 1.0;      ///< smooth_cosine: transition width in units of eps
  std::string label;
};

Field make_initial(const InitialDatum& d, const CylinderGrid& grid, double eps,
                   const DoubleWell& well);

struct StabilityConfig {
  DoubleWell well = DoubleWell::quartic();
  ForcingDescriptor forcing = ForcingDescriptor::constant(0.1);
  double length = 1.0;
  int sharp_nodes = 201;
  DiffuseRunParams diffuse;  ///< dz = 0 selects eps / 4 here
  SharpRunParams sharp;
  std::vector<double> times{0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  double plateau_tol = 0.05;  ///< relative change between the last two samples
  double frame_speed = 0.0;   ///< 0 computes c_eps with find_c_dagger_eps
  double band_delta = 0.2;    ///< admissible data satisfy 0 <= u0 <= 1 + band_delta
};

struct StabilityRun {
  std::string label;
  std::vector<double> times;
  std::vector<double> l1;  ///< aligned L1(Sigma_M) distance to the subgraph of psi
  double r_inf = 0.0;
  double initial = 0.0;
  double plateau = 0.0;
  bool plateau_reached = false;
  std::vector<Field> snapshots;  ///< frame fields at `times`
};

struct StabilityReport {
  double eps = 0.0;
  double frame_speed = 0.0;
  double M = 0.0;
  double sigma_measure = 0.0;  ///< |Sigma_M|
  double l1_estimate = 0.0;    ///< quadrature error estimate of one L1 value
  Profile psi;
  std::vector<StabilityRun> runs;
  double shape_spread = 0.0;  ///< max L1(Sigma_M) distance between aligned final fields
};

/// Evolves each datum in the frame moving with c_eps, aligns the 1/2 crossing
/// at the last time (R_inf) and records the L1(Sigma_M) distance to the
/// subgraph of psi at the scheduled times. Throws ConfigError("not-front-like")
/// for data outside [0, 1 + band_delta] or not close to 1 at the bottom of the window.
StabilityReport stability_experiment(double eps, const std::vector<InitialDatum>& data,
                                     const StabilityConfig& config);

/// L1 distance on Omega x (-M, M) between u(y, z + shift) and the subgraph of
/// psi; u is extended by its end rows outside the window.
double aligned_l1(const Field& u, double shift, const Profile& psi, double M);

/// Field in the variables x / eps.
Field stretch(const Field& u, double eps);

struct Point {
  double y = 0.0;
  double z = 0.0;
};

/// Points of the leading theta-crossing on `count` evenly spaced columns.
std::vector<Point> interface_centers(const Field& u, double theta, int count);

/// Average of fn(u) over B(p, R) intersected with the cylinder window.
/// Throws ConfigError("ball-outside-window") if the ball leaves the window in z.
double ball_average(const Field& u, Point p, double R, double (*fn)(double));

struct DensityAudit {
  std::vector<Point> centers;
  std::vector<int> radii;  ///< r0 .. R0
  double alpha = 0.0;           ///< tested value
  double alpha_achieved = 0.0;  ///< largest alpha passing at every center non-vacuously
  std::vector<std::vector<double>> mean_u2;     ///< [center][radius]
  std::vector<std::vector<double>> mean_1mu2;   ///< same for (1 - u)^2
  std::vector<bool> applies;  ///< precondition met at r0 for either quantity
  bool pass = false;
};

/// min over centers of the r0-ball averages of u^2 and (1 - u)^2.
double fit_alpha(const Field& u, const std::vector<Point>& centers, int r0);

DensityAudit density_audit_L2(const Field& u, const std::vector<Point>& centers, double alpha,
                              int r0, int R0);

struct LevelSetAudit {
  double beta = 0.0;
  Point center;
  std::vector<double> radii;
  std::vector<double> mu;
  double exponent = 0.0;
  double C = 0.0;  ///< min over R of mu / R^2
  bool pass = false;
};

/// mu_R = |{|u| > beta} cap B(center, R)|; pass iff the log-log slope is at
/// least 1.8. Throws Error("precondition-empty") if mu_1 = 0.
LevelSetAudit density_audit_levelset(const Field& u, double beta, const std::vector<double>& radii,
                                     Point center);

}  // namespace sfront
