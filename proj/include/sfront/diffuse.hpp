#pragma once

// Allen-Cahn model in a stratified cylinder,
//   eps u_t = eps Lap u + f(u) / eps + a(y, u),
// its transverse equilibria v_eps and the variational wave speed c_eps.

#include <string>
#include <vector>

#include "sfront/functionals.hpp"
#include "sfront/model.hpp"
#include "sfront/speed.hpp"

namespace sfront {

struct DiffuseRunParams {
  double eps = 0.05;
  double dt = 0.0;           ///< 0 selects dt_factor * eps^2
  double dt_factor = 0.25;
  /// Lab-frame runs. 1: reaction explicit (first order).
  /// 0.5: linearly implicit trapezoid with the reaction Jacobian (second order).
  /// The pinned relaxation always uses 1.
  double time_theta = 0.5;
  double t_max = 10.0;
  double fit_fraction = 0.5;  ///< trailing share of the run used for slope fits
  double drift_tol = 5e-3;    ///< allowed change of the fitted slope between fit halves
  double theta_pin = 0.5;
  double shift_margin = 0.35;  ///< window fraction kept ahead of the leading edge
  double band_delta = 0.2;     ///< max-principle band [0, 1 + delta] (reported only)
  double shape_tol = 1e-7;     ///< pinned flow: stationary when sup|du|/dt is below this
  int max_steps = 400000;
  int record_every = 1;

  // default grids for find_c_dagger_eps (0 picks the refinement policy)
  double dz = 0.0;
  double window_below = 16.0;  ///< in units of eps
  double window_above = 16.0;

  // speed selection
  double tol_c = 1e-7;
  double bracket_margin = 0.2;
  int max_bisections = 60;
  bool cross_check = false;
  double cross_check_t = 1.0;

  std::string split =
      "delta-form Douglas splitting: diffusion and axial drift implicit per direction, "
      "reaction explicit";

  double time_step() const { return dt > 0.0 ? dt : dt_factor * eps * eps; }
  /// Axial spacing policy min(eps/4, 2.5 eps^2) unless dz is set.
  double axial_spacing() const;
  /// Throws ConfigError when the grid under-resolves the interface.
  void validate(const CylinderGrid& grid) const;
};

/// Section with dy <= eps / 4.
CrossSection section_for_eps(double length, double eps);

/// Window [-window_below * eps, window_above * eps] with the configured spacing.
CylinderGrid diffuse_grid(const CrossSection& section, const DiffuseRunParams& params);

/// Planar interface u = gamma(-(z - z0) / eps) (1 below, 0 above).
Field planar_front(const CylinderGrid& grid, double eps, const DoubleWell& well, double z0 = 0.0);

struct StepStats {
  int below_band = 0;  ///< nodes with u < 0 after the step
  int above_band = 0;  ///< nodes with u > 1 + band_delta
  double max_change = 0.0;
};

/// Time stepper for the equation in a frame moving with speed c (c = 0 is
/// the lab frame). Coefficients are factorised once.
class RdStepper {
 public:
  RdStepper(const CylinderGrid& grid, const DiffuseRunParams& params, const DoubleWell& well,
            const Forcing& forcing, double c = 0.0);

  /// Advances u by one step. Throws NumericalError("blow-up") if |u| > 3.
  StepStats step(Field& u);
  double dt() const { return dt_; }

 private:
  struct Factor {
    std::vector<double> lower, upper, inv_diag, mult;
    void solve(std::vector<double>& x) const;
  };
  static Factor factorise(std::vector<double> lower, std::vector<double> diag,
                          std::vector<double> upper);

  CylinderGrid grid_;
  const DoubleWell* well_;
  const Forcing* forcing_;
  double eps_, dt_, c_, band_;
  std::vector<double> ay_lo_, ay_di_, ay_up_, az_lo_, az_di_, az_up_;
  Factor fy_, fz_;
  std::vector<double> rhs_, buf_, jac_, dz_scratch_;
  double theta_;

  void solve_linearised(const std::vector<double>& u);
  void solve_explicit_reaction();
  StepStats finish(Field& field);
};

/// One step in the lab frame.
Field step_rd(const Field& u, const DiffuseRunParams& params, const DoubleWell& well,
              const Forcing& forcing);

/// R_theta = sup{z : max_y u(., z) > theta}, linearly interpolated.
/// Throws Error("no-crossing").
double leading_edge(const Field& u, double theta);

/// Translates the window by whole rows so that z_shift grows by k dz;
/// new rows copy the last one.
void shift_window(Field& u, int k);

struct DynamicSpeedResult {
  SpeedResult speed;
  std::vector<double> thetas;
  std::vector<double> slopes;  ///< one per theta
  std::vector<double> times;
  std::vector<std::vector<double>> edges;  ///< edges[k][n] = R_{thetas[k]}(times[n])
  Field final_field;
};

/// Least-squares slope of R_theta(t) over the trailing fit window.
/// Throws NumericalError("non-convergent-drift") if the slope over the two
/// halves of the fit window differs by more than drift_tol.
DynamicSpeedResult measure_speed_dynamic(const Field& initial, const DiffuseRunParams& params,
                                         const DoubleWell& well, const Forcing& forcing,
                                         double theta = 0.5);

struct EquilibriumResult {
  Profile v;
  double energy = 0.0;
  double nu = 0.0;  ///< smallest eigenvalue of the second variation
  double residual = 0.0;
  int flow_steps = 0;
  int newton_steps = 0;
  int eigen_iterations = 0;
  bool trivial = false;  ///< converged to v = 0
};

/// Critical point of E^eps reached from `seed`; residual below `tol` in sup norm.
EquilibriumResult find_equilibrium_v(double eps, const DoubleWell& well, const Forcing& forcing,
                                     const Profile& seed, double tol = 1e-8);

/// Smallest eigenvalue of -eps v'' + (W''(v)/eps - a_u(y, v)) with Neumann ends.
double second_variation_min(const Profile& v, double eps, const DoubleWell& well,
                            const Forcing& forcing, int* iterations = nullptr);

enum class PinnedOutcome { stationary, collapse, runaway };
std::string to_string(PinnedOutcome o);

struct PinnedResult {
  Field u;
  EnergyReport energy;
  bool energy_ok = false;  ///< false when the window was too small to evaluate Phi
  PinnedOutcome outcome = PinnedOutcome::stationary;
  double drift = 0.0;  ///< d(pin translation)/dt at the end of the run; c_eps - c
  double mass = 0.0;   ///< weighted measure of {u > 1/2} in the window
  double shape_change = 0.0;
  bool shape_converged = false;
  int steps = 0;
};

/// Weighted L2 gradient flow of Phi_c^eps with the leading 1/2 crossing pinned
/// at z = 0. Outcome: drift > 0 means c is below the wave speed (runaway),
/// drift < 0 means it is above (collapse). A field that drops below 1/2
/// everywhere is reported as collapse.
PinnedResult minimize_phi_pinned(double c, const DiffuseRunParams& params, const DoubleWell& well,
                                 const Forcing& forcing, const Field& seed);

struct DiffuseSpeedResult {
  SpeedResult speed;
  Field profile;
  EnergyReport energy;
  bool energy_ok = false;
  double dynamic_speed = 0.0;  ///< NaN unless cross_check
  bool cross_check_ok = true;
  std::vector<std::pair<double, PinnedOutcome>> history;
};

/// Bracketed search for c_eps on the classification of minimize_phi_pinned.
/// Throws NumericalError("bracket") if the ends do not classify.
DiffuseSpeedResult find_c_dagger_eps(const DiffuseRunParams& params, const DoubleWell& well,
                                     const Forcing& forcing);
/// Same, starting from an explicit seed field.
DiffuseSpeedResult find_c_dagger_eps(const DiffuseRunParams& params, const DoubleWell& well,
                                     const Forcing& forcing, const Field& seed);

struct CvarReport {
  double lhs = 0.0;  ///< Phi_c^eps(u)
  double rhs = 0.0;  ///< (c^2 - c_eps^2)/c^2 * int e^{cz} eps/2 |u_z|^2
  double margin = 0.0;
  bool pass = false;
};

CvarReport verify_cvar(const Field& u, double c, double eps, double c_dag_eps,
                       const DoubleWell& well, const Forcing& forcing, double tol = 1e-9);

}  // namespace sfront
