#pragma once

// Exponentially weighted energies of the diffuse and sharp models, the
// weighted perimeter of discrete sets, the columnwise rearrangement into a
// subgraph and the Modica-Mortola recovery field.

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sfront/model.hpp"

namespace sfront {

struct EnergyReport {
  double value = 0.0;
  double c = 0.0;
  double eps = 0.0;  ///< 0 when the energy has no interface parameter
  double z_lo = 0.0; ///< truncation window actually integrated (absolute z)
  double z_hi = 0.0;
  double tail_estimate = 0.0;  ///< contribution added for z < z_lo (frozen trace)
  double tail_bound = 0.0;     ///< bound on what the truncation still misses
};

/// Set S in a cylinder window. Columns are the dual cells of the cross-section
/// nodes (node i owns [y_i - dy/2, y_i + dy/2] clipped to Omega); rows are the
/// axial cells [z_j, z_{j+1}], j = 0 .. nz - 2. An occupied bottom row means
/// the column continues below the window; the top row must stay empty.
class DiscreteSet {
 public:
  enum class FaceKind : std::uint8_t { horizontal, vertical };
  struct Face {
    FaceKind kind;
    int i;  ///< column (horizontal) or left column of the pair (vertical)
    int j;  ///< node row of a horizontal face, cell row of a vertical face
  };

  DiscreteSet() = default;
  explicit DiscreteSet(CylinderGrid grid);

  /// Cells whose centre lies below psi(y_i); masked nodes give empty columns.
  static DiscreteSet subgraph(const CylinderGrid& grid, const Profile& psi);

  const CylinderGrid& grid() const { return grid_; }
  int columns() const { return grid_.ny(); }
  int rows() const { return grid_.nz - 1; }
  bool contains(int i, int j) const { return occ_[index(i, j)] != 0; }
  void set(int i, int j, bool inside) { occ_[index(i, j)] = inside ? 1 : 0; }
  double column_width(int i) const { return grid_.section.weight(i); }
  bool empty() const;
  bool bounded_above() const;

  /// Relative boundary: faces on the lateral boundary of the cylinder and the
  /// open bottom of the window are excluded.
  std::vector<Face> boundary_faces() const;

  /// Run-length encoding: (column, first row, one-past-last row) triples.
  std::vector<std::array<int, 3>> runs() const;
  static DiscreteSet from_runs(const CylinderGrid& grid,
                               const std::vector<std::array<int, 3>>& runs);

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * grid_.ny() + i;
  }
  CylinderGrid grid_;
  std::vector<std::uint8_t> occ_;
};

/// Discrete Ginzburg-Landau energy Phi_c^eps on the window plus the left tail
/// with u frozen at its trace. Gradient terms live on grid edges, potential
/// terms on nodes, the weight e^{cz} is integrated exactly over each cell.
/// Throws Error("window-too-small") if u still varies at either window end by
/// more than `end_tolerance`.
EnergyReport phi_c_eps(const Field& u, double c, double eps, const DoubleWell& well,
                       const Forcing& forcing, double end_tolerance = 1e-3);

/// int e^{cz} (eps/2) |u_z|^2 over the window (same edge discretisation).
double weighted_axial_dirichlet(const Field& u, double c, double eps);

/// E^eps(v) = int_Omega eps/2 |v'|^2 + W(v)/eps - G(y, v).
double energy_E_eps(const Profile& v, double eps, const DoubleWell& well,
                    const Forcing& forcing);

/// Integral of the piecewise linear interpolant of the nodal g over [a, b].
double integral_of_g(const Forcing& forcing, double a, double b);

/// E^0(A) = c_W Per(A, Omega) - int_A g for A a union of disjoint intervals.
/// Touching intervals are merged; overlapping ones are rejected.
double energy_E0(std::vector<std::pair<double, double>> intervals, const Forcing& forcing,
                 const DoubleWell& well);

double weighted_volume(const DiscreteSet& S, double c);
double per_c(const DiscreteSet& S, double c);
double fgeo_c(const DiscreteSet& S, double c, const DoubleWell& well, const Forcing& forcing);

/// F_c of the exact (unquantised) subgraph of psi with the same column/face
/// geometry as `fgeo_c`; masked columns are empty.
double fgeo_subgraph(const Profile& psi, double c, const DoubleWell& well,
                     const Forcing& forcing);

/// F_c(psi) = int e^{c psi} (c_W sqrt(1 + |psi'|^2) - g / c); midpoint rule.
/// Throws Error("masked-profile") when psi has -infinity nodes.
double energy_F_c(const Profile& psi, double c, const DoubleWell& well, const Forcing& forcing);

/// G_c(zeta) = int c_W sqrt(c^2 zeta^2 + |zeta'|^2) - g zeta; midpoint rule.
/// Throws Error("negative-zeta") for negative nodes.
double energy_G_c(const Profile& zeta, double c, const DoubleWell& well,
                  const Forcing& forcing);

/// psi(y) = (1/c) ln(c int_{S^y} e^{cz} dz); empty columns are masked.
Profile rearrange_subgraph(const DiscreteSet& S, double c);

/// Solution of gamma' = sqrt(2 W(gamma)), gamma(0) = 1/2, tabulated by RK4.
class InterfaceProfile {
 public:
  explicit InterfaceProfile(const DoubleWell& well, double t_max = 40.0, double step = 1e-3);
  double operator()(double t) const;
  double t_max() const { return t_max_; }

 private:
  double t_max_, step_;
  std::vector<double> values_, slopes_;  // t from -t_max to t_max
};

/// Smooth monotone cutoff: 0 for s <= 0, 1 for s >= 1.
double smooth_cutoff(double s);

/// Signed distance to the graph of psi (positive below the graph).
double signed_distance_to_graph(const Profile& psi, double y, double z);

/// u_{eps,M}(y,z) = gamma(d(y,z)/eps) * eta((z + M)/eps) on `grid`.
/// Throws Error("window") unless the window covers [-M - eps, sup psi + 10 eps].
Field modica_mortola_recovery(const Profile& psi, double eps, double M, const DoubleWell& well,
                              const CylinderGrid& grid);

/// Nodewise phi(u) = int_0^u sqrt(2W).
Field phi_transform(const Field& u, const DoubleWell& well);

}  // namespace sfront
