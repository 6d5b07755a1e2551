#pragma once

// Forced mean-curvature flow of graphs over the cross-section,
//   h_t = h_yy / (1 + h_y^2) + (g / c_W) sqrt(1 + h_y^2),
// and the variational speed c obtained from the 1-homogeneous functional G_c.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sfront/model.hpp"
#include "sfront/speed.hpp"

namespace sfront {

struct SharpRunParams {
  double dt = 0.0;  ///< 0 selects cfl * dy^2
  double cfl = 0.4;
  double t_max = 40.0;
  double check_interval = 0.02;  ///< time between shape-drift checks
  double shape_tol = 1e-6;       ///< stationary when sup |d(h - max h)/dt| is below this
  double gradient_limit = 1e3;

  std::vector<double> delta_schedule{1e-3, 1e-4, 1e-5};
  int max_newton = 400;
  double newton_tol = 1e-9;
  double finger_tol = 1e-8;  ///< zeta below finger_tol * max zeta counts as zero
  double tol_c = 1e-7;
  double bracket_widen = 0.01;
  int max_bisections = 80;
  double el_tol = 10.0;  ///< Euler-Lagrange pass threshold, in units of dy^2

  double time_step(const CrossSection& s) const { return dt > 0.0 ? dt : cfl * s.dy() * s.dy(); }
  void validate(const CrossSection& s) const;
};

/// One explicit step of the graph flow with mirrored ghosts, central
/// differences throughout. The step preserves nodewise ordering while
/// dy |g / c_W| |h_y| sqrt(1 + h_y^2) <= 2; steep rough data can break it.
/// Throws NumericalError("gradient-blow-up") if |h_y| exceeds the limit.
Profile step_fmc(const Profile& h, const SharpRunParams& params, const DoubleWell& well,
                 const Forcing& forcing);

struct SharpSpeedResult {
  SpeedResult speed;
  Profile psi;  ///< max psi = 0; empty (size 0) if the shape never became stationary
  bool stationary = false;
  std::vector<double> times;
  std::vector<double> max_h;
  std::vector<double> shape_drift;
};

SharpSpeedResult measure_speed_fmc(const Profile& initial, const SharpRunParams& params,
                                   const DoubleWell& well, const Forcing& forcing);

struct GcMinimizerResult {
  double c = 0.0;
  Profile zeta;                       ///< sum_i w_i zeta_i = 1 (trapezoid weights)
  double m = 0.0;                     ///< min value extrapolated to delta -> 0
  std::vector<double> m_by_delta;     ///< one per schedule entry
  std::vector<std::uint8_t> support;  ///< 1 where zeta is above finger_tol * max zeta
  bool fingers = false;               ///< some node stayed at zero across the schedule
  int iterations = 0;
  double constraint_defect = 0.0;
  double gradient_residual = 0.0;
};

/// Minimises int c_W sqrt(delta^2 + c^2 zeta^2 + zeta'^2) - g zeta over
/// {zeta >= 0, int zeta = 1} by an active-set Newton method, continuing in delta.
/// `warm` (optional) seeds the first stage.
GcMinimizerResult minimize_G_c(double c, const SharpRunParams& params, const DoubleWell& well,
                               const Forcing& forcing, const Profile* warm = nullptr);

struct SharpCResult {
  SpeedResult speed;
  GcMinimizerResult minimizer;
  Profile psi;  ///< ln(c zeta) / c shifted to max psi = 0
  std::vector<std::pair<double, double>> m_samples;  ///< (c, m(c)) evaluated by the search
};

/// Bisection on the sign of m(c) inside [mean g / c_W, sup g / c_W] (widened).
/// Throws NumericalError("bracket") if the ends do not have opposite signs.
SharpCResult find_c_dagger(const SharpRunParams& params, const DoubleWell& well,
                           const Forcing& forcing);

/// psi = ln(c zeta) / c; nodes with zeta <= threshold are masked.
Profile profile_from_zeta(const Profile& zeta, double c, double threshold = 0.0);

struct EulerLagrangeReport {
  double interior = 0.0;  ///< sup over unmasked nodes with unmasked neighbours
  double boundary = 0.0;  ///< equation at the end nodes with mirrored ghosts
  double neumann = 0.0;   ///< one-sided psi'(0), psi'(L)
  double residual = 0.0;  ///< max of the three
  double dy = 0.0;
  double threshold = 0.0;
  int evaluated = 0;
  bool pass = false;
};

/// Residual of -(psi'/sqrt(1+psi'^2))' = g/c_W - c/sqrt(1+psi'^2) in flux form.
EulerLagrangeReport check_euler_lagrange(const Profile& psi, double c, const DoubleWell& well,
                                         const Forcing& forcing, double el_tol = 10.0);

}  // namespace sfront
