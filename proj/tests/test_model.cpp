#include "doctest.h"

#include <cmath>

#include "sfront/error.hpp"
#include "sfront/model.hpp"
#include "sfront/numerics.hpp"

using namespace sfront;

TEST_CASE("quartic well constants") {
  const DoubleWell w = DoubleWell::quartic();
  CHECK(w.c_W() == doctest::Approx(0.1178511302).epsilon(1e-9));
  CHECK(w.c_W() == doctest::Approx(1.0 / (6.0 * std::sqrt(2.0))).epsilon(1e-10));
  CHECK(w.W(0.5) == doctest::Approx(1.0 / 64.0));
  CHECK(w.f(0.0) == 0.0);
  CHECK(w.f(1.0) == 0.0);
  CHECK(w.balanced());
  CHECK(w.certificate().stable_wells_ok);
  CHECK(w.certificate().positivity_ok);
}

TEST_CASE("f is minus the derivative of W") {
  const DoubleWell w = DoubleWell::quartic();
  const double h = 1e-5;
  for (double u = -0.5; u <= 1.5; u += 0.07) {
    const double dW = (w.W(u + h) - w.W(u - h)) / (2 * h);
    CHECK(w.f(u) == doctest::Approx(-dW).epsilon(1e-7));
    const double df = (w.f(u + h) - w.f(u - h)) / (2 * h);
    CHECK(w.f_prime(u) == doctest::Approx(df).epsilon(1e-6));
  }
}

TEST_CASE("phi matches a Simpson integral of sqrt(2W)") {
  const DoubleWell w = DoubleWell::quartic();
  for (double u : {0.0, 0.25, 0.5, 0.8, 1.0}) {
    const double ref = num::simpson([&](double s) { return std::sqrt(2 * w.W(s)); }, 0.0, u, 4001);
    CHECK(w.phi(u) == doctest::Approx(ref).epsilon(1e-7));
  }
  CHECK(w.phi(1.0) == doctest::Approx(w.c_W()).epsilon(1e-7));
}

TEST_CASE("cubic well is unbalanced") {
  const DoubleWell w = DoubleWell::cubic(0.4);
  CHECK_FALSE(w.balanced());
  CHECK(std::isnan(w.c_W()));
  CHECK(w.f(0.4) == doctest::Approx(0.0));
}

TEST_CASE("product forcing with constant g") {
  const CrossSection s(1.0, 41);
  const Forcing F = build_forcing(ForcingDescriptor::constant(0.1), s);
  for (int i = 0; i < s.nodes; ++i) CHECK(F.g(i) == doctest::Approx(0.1));
  CHECK(F.a(0.3, 0.0) == 0.0);
  CHECK(F.G(0.3, 1.0) == doctest::Approx(0.1));
  CHECK(forcing_quadrature_defect(F) <= 1e-8);
}

TEST_CASE("cosine forcing has the prescribed mean") {
  const CrossSection s(1.0, 201);
  const Forcing F = build_forcing(ForcingDescriptor::cosine(0.1, 0.5, 1.0), s);
  CHECK(F.g_mean() == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(F.g_max() == doctest::Approx(0.15));
  CHECK(F.g_min() == doctest::Approx(0.05));
  CHECK(forcing_quadrature_defect(F) <= 1e-8);
}

TEST_CASE("tabulated forcing") {
  const CrossSection s(1.0, 11);
  SUBCASE("consistent table integrates to g") {
    // a(y, u) = 6 g (u - u^2) sampled on a fine u grid
    std::vector<double> uk;
    for (int k = 0; k <= 200; ++k) uk.push_back(k / 200.0);
    std::vector<double> yk{0.0, 1.0}, vals;
    for (double y : yk)
      for (double u : uk) vals.push_back(6 * (0.1 + 0.05 * y) * (u - u * u));
    const Forcing F = build_forcing(ForcingDescriptor::tabulated(yk, uk, vals), s);
    CHECK(F.g(0) == doctest::Approx(0.1).epsilon(1e-4));
    CHECK(F.g(s.nodes - 1) == doctest::Approx(0.15).epsilon(1e-4));
    CHECK(forcing_quadrature_defect(F) <= 1e-8);
  }
  SUBCASE("nonzero at origin") {
    std::vector<double> yk{0.0, 1.0}, uk{0.0, 1.0}, vals{0.01, 0.0, 0.01, 0.0};
    try {
      build_forcing(ForcingDescriptor::tabulated(yk, uk, vals), s);
      FAIL("expected an error");
    } catch (const ConfigError& e) {
      CHECK(e.code() == "nonzero-at-origin");
    }
  }
}

TEST_CASE("well constants") {
  const DoubleWell w = DoubleWell::quartic();
  const CrossSection s(1.0, 11);
  const Forcing F = build_forcing(ForcingDescriptor::constant(0.1), s);
  CHECK(check_well_constants(w, F, 0.01).pass);
  CHECK_FALSE(check_well_constants(w, F, 10.0).pass);

  const Forcing zero = build_forcing(ForcingDescriptor::constant(0.0), s);
  for (double eps : {1e-3, 0.01, 0.1, 1.0, 10.0, 100.0})
    CHECK(check_well_constants(w, zero, eps).pass);

  const auto best = largest_admissible_eps(w, F, {0.001, 0.01, 0.05, 10.0});
  REQUIRE(best.has_value());
  CHECK(*best < 10.0);
}

TEST_CASE("grid geometry") {
  const CrossSection s(2.0, 5);
  CHECK(s.dy() == doctest::Approx(0.5));
  double total = 0;
  for (int i = 0; i < s.nodes; ++i) total += s.weight(i);
  CHECK(total == doctest::Approx(2.0));

  const CylinderGrid g(s, -1.0, 1.0, 0.1);
  CHECK(g.z(0) == doctest::Approx(-1.0));
  CHECK(g.z_max() >= 1.0 - 1e-12);
  CHECK(g.z_max() < 1.1);
}

TEST_CASE("profile masking") {
  Profile p(CrossSection(1.0, 3), 2.0);
  p.masked[1] = 1;
  CHECK(p.any_masked());
  CHECK(std::isinf(p.value(1)));
  CHECK(p.max_unmasked() == 2.0);
}
