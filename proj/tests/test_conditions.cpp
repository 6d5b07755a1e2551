#include "doctest.h"

#include <cmath>

#include "sfront/conditions.hpp"
#include "sfront/error.hpp"
#include "sfront/functionals.hpp"

using namespace sfront;

namespace {

const DoubleWell kWell = DoubleWell::quartic();

/// g = peak on [0.4, 0.6], base elsewhere, with one-cell ramps.
Forcing bump(double peak, double base, int nodes = 101) {
  return build_forcing(ForcingDescriptor::product_table({0.0, 0.39, 0.4, 0.6, 0.61, 1.0},
                                                        {base, base, peak, peak, base, base}),
                       CrossSection(1.0, nodes));
}

/// Best int_A g - c_W Per(A) over single intervals on `n` points and over
/// pairs of intervals on `m` points.
double brute_force(const Forcing& F, int n, int m) {
  const double L = F.section().length, cw = kWell.c_W();
  const auto value = [&](double a, double b) {
    double per = 0.0;
    if (a > 1e-12) per += 1;
    if (b < L - 1e-12) per += 1;
    return integral_of_g(F, a, b) - cw * per;
  };
  double best = -1e300;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) best = std::max(best, value(L * i / (n - 1), L * j / (n - 1)));
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b)
      for (int c = b + 1; c < m; ++c)
        for (int d = c + 1; d < m; ++d)
          best = std::max(best, value(L * a / (m - 1), L * b / (m - 1)) +
                                    value(L * c / (m - 1), L * d / (m - 1)));
  return best;
}

}  // namespace

TEST_CASE("positive mean forcing holds with the whole section") {
  const Forcing F = build_forcing(ForcingDescriptor::constant(0.1), CrossSection(1.0, 21));
  const AssumptionReport r = check_h4(kWell, F);
  CHECK(r.verdict == Verdict::holds);
  REQUIRE(r.witness.size() == 1);
  CHECK(r.witness[0].first == 0.0);
  CHECK(r.witness[0].second == 1.0);
  CHECK(r.margin == doctest::Approx(0.1));
}

TEST_CASE("negative constant forcing fails") {
  const Forcing F = build_forcing(ForcingDescriptor::constant(-0.1), CrossSection(1.0, 21));
  const AssumptionReport r = check_h4(kWell, F);
  CHECK(r.verdict == Verdict::fails);
  CHECK(r.margin <= 0.0);
}

TEST_CASE("a strong bump on a negative background holds") {
  const Forcing F = bump(1.5, -0.5);
  const AssumptionReport r = check_h4(kWell, F);
  CHECK(r.verdict == Verdict::holds);
  CHECK(r.margin > 0.0);
  CHECK(energy_E0(r.witness, F, kWell) == doctest::Approx(-r.margin).epsilon(1e-10));
  CHECK(energy_E0(r.witness, F, kWell) < 0.0);
  const double oracle = brute_force(F, 401, 41);
  CHECK(r.margin >= oracle - 1e-12);
  CHECK(r.margin == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("a weak bump on a negative background fails") {
  const Forcing F = bump(0.5, -0.5);
  const AssumptionReport r = check_h4(kWell, F);
  CHECK(r.verdict == Verdict::fails);
  CHECK(r.margin >= brute_force(F, 401, 41) - 1e-12);
}

TEST_CASE("two bumps need two intervals") {
  const Forcing F = build_forcing(
      ForcingDescriptor::product_table({0.0, 0.1, 0.2, 0.8, 0.9, 1.0}, {1.6, 1.6, -0.5, -0.5, 1.6, 1.6}),
      CrossSection(1.0, 101));
  const AssumptionReport r = check_h4(kWell, F);
  CHECK(r.verdict == Verdict::holds);
  CHECK(r.margin >= brute_force(F, 201, 41) - 1e-12);
}

TEST_CASE("adding a positive constant never breaks the assumption") {
  double prev = -1e300;
  for (double k : {0.0, 0.1, 0.2, 0.4}) {
    const AssumptionReport r = check_h4(kWell, bump(1.5 + k, -0.5 + k));
    CHECK(r.verdict == Verdict::holds);
    CHECK(r.margin >= prev - 1e-12);
    prev = r.margin;
  }
}

TEST_CASE("unbalanced wells are rejected") {
  const Forcing F = build_forcing(ForcingDescriptor::constant(0.1), CrossSection(1.0, 11));
  CHECK_THROWS_AS(check_h4(DoubleWell::cubic(0.4), F), ConfigError);
}

TEST_CASE("sufficient conditions for uniqueness") {
  const CrossSection sec(1.0, 101);
  SUBCASE("positive forcing") {
    const AssumptionReport r =
        check_h6_sufficient(kWell, build_forcing(ForcingDescriptor::cosine(0.1, 0.5, 1.0), sec));
    CHECK(r.verdict == Verdict::holds);
    CHECK(r.condition == "ii");
    CHECK(r.margin == doctest::Approx(0.05));
  }
  SUBCASE("sign change with small oscillation") {
    const AssumptionReport r =
        check_h6_sufficient(kWell, build_forcing(ForcingDescriptor::cosine(0.05, 2.0, 1.0), sec));
    CHECK(r.verdict == Verdict::holds);
    CHECK(r.condition == "iii");
    CHECK(r.margin == doctest::Approx(2 * kWell.c_W() - 0.2));
  }
  SUBCASE("sign change with large oscillation") {
    const AssumptionReport r =
        check_h6_sufficient(kWell, build_forcing(ForcingDescriptor::cosine(0.05, 3.0, 1.0), sec));
    CHECK(r.verdict == Verdict::undetermined);
    CHECK(r.condition.empty());
  }
  SUBCASE("non-positive mean") {
    CHECK_THROWS_AS(check_h6_sufficient(kWell, build_forcing(ForcingDescriptor::constant(-0.1), sec)),
                    ConfigError);
  }
}
