#include "doctest.h"

#include <cmath>
#include <random>

#include "sfront/error.hpp"
#include "sfront/functionals.hpp"
#include "sfront/numerics.hpp"

using namespace sfront;

namespace {

struct Setup {
  DoubleWell well = DoubleWell::quartic();
  CrossSection section;
  Forcing forcing;
  Setup(double g = 0.1, int nodes = 21) : section(1.0, nodes) {
    forcing = build_forcing(ForcingDescriptor::constant(g), section);
  }
};

double integral_exp(double c, double a, double b) { return (std::exp(c * b) - std::exp(c * a)) / c; }

}  // namespace

TEST_CASE("Phi of the zero field vanishes") {
  Setup s;
  const CylinderGrid grid(s.section, -2.0, 2.0, 0.05);
  const EnergyReport r = phi_c_eps(Field(grid, 0.0), 0.8, 0.1, s.well, s.forcing);
  CHECK(r.value == 0.0);
  CHECK(r.tail_estimate == 0.0);
}

TEST_CASE("Phi scales by e^{ca} under translation") {
  Setup s;
  const double eps = 0.1, c = 0.7;
  CylinderGrid grid(s.section, -3.0, 3.0, eps / 4);
  const InterfaceProfile gamma(s.well);
  const Field u = Field::from_function(grid, [&](double y, double z) {
    return gamma(-(z - 0.2 * std::cos(M_PI * y)) / eps);
  });
  const double base = phi_c_eps(u, c, eps, s.well, s.forcing).value;
  for (double a : {-1.3, 0.25, 2.0}) {
    Field v = u;
    v.grid.z_shift += a;
    const double moved = phi_c_eps(v, c, eps, s.well, s.forcing).value;
    CHECK(moved == doctest::Approx(std::exp(c * a) * base).epsilon(1e-10));
  }
}

TEST_CASE("E^eps on constant profiles") {
  Setup s;
  CHECK(energy_E_eps(Profile(s.section, 0.0), 0.05, s.well, s.forcing) == 0.0);
  CHECK(energy_E_eps(Profile(s.section, 1.0), 0.05, s.well, s.forcing) == doctest::Approx(-0.1));
}

TEST_CASE("E^0 on unions of intervals") {
  Setup s;
  const double cW = s.well.c_W();
  CHECK(energy_E0({{0.0, 1.0}}, s.forcing, s.well) == doctest::Approx(-0.1));
  CHECK(energy_E0({{0.25, 0.75}}, s.forcing, s.well) == doctest::Approx(2 * cW - 0.05));
  CHECK(energy_E0({{0.25, 0.75}}, s.forcing, s.well) == doctest::Approx(0.1857).epsilon(1e-3));
  CHECK(energy_E0({}, s.forcing, s.well) == 0.0);
  CHECK(energy_E0({{0.0, 0.5}, {0.5, 1.0}}, s.forcing, s.well) == doctest::Approx(-0.1));
  CHECK_THROWS_AS(energy_E0({{0.0, 0.6}, {0.5, 1.0}}, s.forcing, s.well), ConfigError);
}

TEST_CASE("integral of the interpolated g") {
  const CrossSection sec(1.0, 11);
  const Forcing F = build_forcing(ForcingDescriptor::product_table({0.0, 1.0}, {0.0, 1.0}), sec);
  // g(y) = y exactly
  CHECK(integral_of_g(F, 0.0, 1.0) == doctest::Approx(0.5));
  CHECK(integral_of_g(F, 0.13, 0.77) == doctest::Approx(0.5 * (0.77 * 0.77 - 0.13 * 0.13)));
}

TEST_CASE("weighted perimeter of flat cuts") {
  Setup s;
  const double c = 0.8;
  const CylinderGrid grid(s.section, -4.0, 4.0, 0.1);
  for (double z0 : {0.0, 1.0, -2.5}) {
    const DiscreteSet S = DiscreteSet::subgraph(grid, Profile(s.section, z0));
    CHECK(per_c(S, c) == doctest::Approx(std::exp(c * z0)).epsilon(1e-12));
    CHECK(per_c(S, c) == doctest::Approx(c * weighted_volume(S, c)).epsilon(1e-12));
  }
  const DiscreteSet flat = DiscreteSet::subgraph(grid, Profile(s.section, 0.0));
  CHECK(fgeo_c(flat, c, s.well, s.forcing) == doctest::Approx(s.well.c_W() - 0.1 / c));
  const double c0 = 0.1 / s.well.c_W();
  CHECK(std::abs(fgeo_c(flat, c0, s.well, s.forcing)) < 1e-14);
  CHECK(fgeo_c(DiscreteSet(grid), c, s.well, s.forcing) == 0.0);
}

TEST_CASE("isoperimetric inequality on random sets") {
  Setup s;
  const CylinderGrid grid(s.section, -3.0, 3.0, 0.1);
  std::mt19937 rng(12345);
  std::uniform_int_distribution<int> row(0, grid.nz - 2);
  std::uniform_real_distribution<double> cdist(0.2, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    DiscreteSet S(grid);
    const int blobs = 1 + trial % 5;
    for (int b = 0; b < blobs; ++b) {
      const int i0 = trial % s.section.nodes;
      const int i1 = std::min(s.section.nodes, i0 + 1 + b * 3);
      int a = row(rng), e = row(rng);
      if (a > e) std::swap(a, e);
      if (b == 0) a = 0;
      for (int i = i0; i < i1; ++i)
        for (int j = a; j < e; ++j) S.set(i, j, true);
    }
    if (S.empty()) continue;
    const double c = cdist(rng);
    CHECK(per_c(S, c) >= c * weighted_volume(S, c) * (1 - 1e-12));
  }
}

TEST_CASE("F_c on constant graphs and G_c on constants") {
  Setup s;
  const double c = 0.9, z0 = 0.4;
  CHECK(energy_F_c(Profile(s.section, z0), c, s.well, s.forcing) ==
        doctest::Approx(std::exp(c * z0) * (s.well.c_W() - 0.1 / c)));
  CHECK(energy_G_c(Profile(s.section, 2.5), c, s.well, s.forcing) ==
        doctest::Approx(2.5 * (s.well.c_W() * c - 0.1)));
  Profile masked(s.section, 0.0);
  masked.masked[3] = 1;
  CHECK_THROWS_AS(energy_F_c(masked, c, s.well, s.forcing), Error);
  Profile negative(s.section, 1.0);
  negative.values[2] = -0.1;
  CHECK_THROWS_AS(energy_G_c(negative, c, s.well, s.forcing), Error);
}

TEST_CASE("F_c(psi) equals G_c(e^{c psi} / c) up to the quadrature") {
  const DoubleWell well = DoubleWell::quartic();
  const double c = 0.95;
  std::vector<double> diffs;
  for (int n : {51, 101, 201, 401}) {
    const CrossSection sec(1.0, n);
    const Forcing F = build_forcing(ForcingDescriptor::cosine(0.1, 0.5, 1.0), sec);
    const Profile psi = Profile::from_function(sec, [](double y) { return 0.3 * std::cos(M_PI * y) + 0.1 * y * y; });
    Profile zeta(sec);
    for (int i = 0; i < n; ++i) zeta.values[i] = std::exp(c * psi.values[i]) / c;
    diffs.push_back(std::abs(energy_F_c(psi, c, well, F) - energy_G_c(zeta, c, well, F)));
  }
  for (std::size_t k = 1; k < diffs.size(); ++k) {
    CHECK(diffs[k] < diffs[k - 1]);
    CHECK(std::log2(diffs[k - 1] / diffs[k]) >= 1.8);
  }
  CHECK(diffs.back() < 1e-6);
}

TEST_CASE("G_c is positively 1-homogeneous") {
  const DoubleWell well = DoubleWell::quartic();
  const CrossSection sec(1.0, 81);
  const Forcing F = build_forcing(ForcingDescriptor::cosine(0.1, 0.5, 1.0), sec);
  const Profile zeta = Profile::from_function(sec, [](double y) { return 1.0 + 0.5 * std::sin(3 * y); });
  for (double c : {0.5, 0.85, 1.2}) {
    const double base = energy_G_c(zeta, c, well, F);
    for (double lambda : {0.5, 2.0, 10.0}) {
      Profile z = zeta;
      for (double& v : z.values) v *= lambda;
      CHECK(energy_G_c(z, c, well, F) == doctest::Approx(lambda * base).epsilon(1e-12));
    }
  }
}

TEST_CASE("rearrangement") {
  Setup s;
  const double c = 0.8;
  SUBCASE("subgraph is a fixed point up to dz") {
    const CylinderGrid grid(s.section, -3.0, 3.0, 0.05);
    const Profile psi0 = Profile::from_function(s.section, [](double y) { return 0.5 * std::sin(4 * y); });
    const Profile psi = rearrange_subgraph(DiscreteSet::subgraph(grid, psi0), c);
    for (int i = 0; i < s.section.nodes; ++i)
      CHECK(std::abs(psi.values[i] - psi0.values[i]) <= grid.dz);
  }
  SUBCASE("two stacked slabs") {
    const CylinderGrid grid(s.section, -3.0, 3.0, 0.25);
    DiscreteSet S(grid);
    for (int i = 0; i < S.columns(); ++i)
      for (int j = 0; j < S.rows(); ++j) {
        const double mid = grid.z(j) + 0.125;
        S.set(i, j, (mid > -2 && mid < -1) || (mid > 0 && mid < 1));
      }
    const double mass = integral_exp(c, -2, -1) + integral_exp(c, 0, 1);
    const double cW = s.well.c_W();
    const double before = cW * (std::exp(-2 * c) + std::exp(-c) + 1 + std::exp(c)) - 0.1 * mass;
    const double after = cW * c * mass - 0.1 * mass;
    CHECK(fgeo_c(S, c, s.well, s.forcing) == doctest::Approx(before).epsilon(1e-12));
    const Profile psi = rearrange_subgraph(S, c);
    for (int i = 0; i < psi.size(); ++i)
      CHECK(psi.values[i] == doctest::Approx(std::log(c * mass) / c).epsilon(1e-12));
    CHECK(fgeo_subgraph(psi, c, s.well, s.forcing) == doctest::Approx(after).epsilon(1e-12));
    CHECK(after < before);
  }
  SUBCASE("an empty column is masked") {
    const CylinderGrid grid(s.section, -3.0, 3.0, 0.25);
    DiscreteSet S = DiscreteSet::subgraph(grid, Profile(s.section, 0.0));
    for (int j = 0; j < S.rows(); ++j) S.set(4, j, false);
    const Profile psi = rearrange_subgraph(S, c);
    CHECK(psi.is_masked(4));
    CHECK_FALSE(psi.is_masked(3));
  }
  SUBCASE("random sets do not increase F_c") {
    const CylinderGrid grid(s.section, -3.0, 3.0, 0.2);
    const Forcing F = build_forcing(ForcingDescriptor::cosine(0.1, 0.5, 1.0), s.section);
    std::mt19937 rng(7);
    std::bernoulli_distribution coin(0.4);
    for (int trial = 0; trial < 50; ++trial) {
      DiscreteSet S(grid);
      for (int i = 0; i < S.columns(); ++i)
        for (int j = 0; j + 1 < S.rows(); ++j) S.set(i, j, coin(rng));
      const Profile psi = rearrange_subgraph(S, c);
      CHECK(fgeo_subgraph(psi, c, s.well, F) <= fgeo_c(S, c, s.well, F) + 1e-12);
    }
  }
}

TEST_CASE("interface profile matches the logistic closed form") {
  const DoubleWell well = DoubleWell::quartic();
  const InterfaceProfile gamma(well);
  for (double t = -12.0; t <= 12.0; t += 0.37) {
    const double exact = 0.5 * (1 + std::tanh(t / (2 * std::sqrt(2.0))));
    CHECK(std::abs(gamma(t) - exact) <= 1e-6);
  }
  CHECK(gamma(0.0) == 0.5);
}

TEST_CASE("recovery field converges to the subgraph in L1") {
  const DoubleWell well = DoubleWell::quartic();
  const CrossSection sec(1.0, 41);
  const Profile psi = Profile::from_function(sec, [](double y) { return 0.2 * std::cos(M_PI * y); });
  const double M = 1.5;
  std::vector<double> errs;
  for (double eps : {0.08, 0.04, 0.02}) {
    const CylinderGrid grid(sec, -M - 0.2, 1.0, 0.005);
    const Field u = modica_mortola_recovery(psi, eps, M, well, grid);
    double err = 0.0;
    for (int j = 0; j < grid.nz; ++j)
      for (int i = 0; i < grid.ny(); ++i) {
        const double z = grid.z(j);
        if (z < -M || z > M) continue;
        const double chi = z < psi.values[i] ? 1.0 : 0.0;
        err += sec.weight(i) * grid.z_weight(j) * std::abs(u.at(i, j) - chi);
      }
    errs.push_back(err);
  }
  for (std::size_t k = 1; k < errs.size(); ++k) CHECK(errs[k] / errs[k - 1] == doctest::Approx(0.5).epsilon(0.2));
  CHECK_THROWS_AS(modica_mortola_recovery(psi, 0.05, M, well, CylinderGrid(sec, -0.5, 1.0, 0.01)), Error);
}

TEST_CASE("phi transform of the wells") {
  const DoubleWell well = DoubleWell::quartic();
  const CylinderGrid grid(CrossSection(1.0, 5), -1.0, 1.0, 0.5);
  const Field one = phi_transform(Field(grid, 1.0), well);
  for (double v : one.u) CHECK(v == doctest::Approx(well.c_W()).epsilon(1e-7));
  for (double v : phi_transform(Field(grid, 0.0), well).u) CHECK(v == 0.0);
}

TEST_CASE("signed distance to a flat graph") {
  const Profile psi(CrossSection(1.0, 11), 0.5);
  CHECK(signed_distance_to_graph(psi, 0.3, 0.2) == doctest::Approx(0.3));
  CHECK(signed_distance_to_graph(psi, 0.3, 0.9) == doctest::Approx(-0.4));
}
