#include "sfront/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sfront/error.hpp"

namespace sfront {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::undetermined: return "undetermined";
  }
  return "undetermined";
}

namespace {

double nodal_integral(const Forcing& forcing) {
  const CrossSection& s = forcing.section();
  double total = 0.0;
  for (int i = 0; i < s.nodes; ++i) total += s.weight(i) * forcing.g(i);
  return total;
}

struct Candidate {
  double value = -std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> intervals;
};

}  // namespace

AssumptionReport check_h4(const DoubleWell& well, const Forcing& forcing, H4Options opts) {
  if (!well.balanced()) throw ConfigError("well", "check_h4 needs a balanced double well");
  if (opts.refine < 1 || opts.max_intervals < 1)
    throw ConfigError("params", "refine and max_intervals must be positive");
  const CrossSection& s = forcing.section();
  const double cw = well.c_W();

  AssumptionReport rep;
  rep.assumption = "H4";
  const double total = nodal_integral(forcing);
  rep.margins.emplace_back("integral_g", total);
  if (total > 0.0) rep.notes.push_back("int g > 0: A = Omega already qualifies");

  // prefix integrals of the piecewise linear interpolant on the refined grid
  const int P = (s.nodes - 1) * opts.refine;
  std::vector<double> x(P + 1), I(P + 1, 0.0);
  const auto g_lin = [&](int p) {
    const int i = p / opts.refine, r = p % opts.refine;
    if (r == 0) return forcing.g(i);
    const double t = static_cast<double>(r) / opts.refine;
    return (1 - t) * forcing.g(i) + t * forcing.g(i + 1);
  };
  for (int p = 0; p <= P; ++p) {
    x[p] = p == P ? s.length : s.length * p / P;
    if (p > 0) I[p] = I[p - 1] + 0.5 * (x[p] - x[p - 1]) * (g_lin(p - 1) + g_lin(p));
  }

  const int K = opts.max_intervals;
  std::vector<Candidate> in(K + 1), out(K + 1);
  out[0].value = 0.0;
  for (int p = 0; p <= P; ++p) {
    const double cost = (p == 0 || p == P) ? 0.0 : cw;
    std::vector<Candidate> nin = in, nout = out;
    for (int k = 1; k <= K; ++k) {
      const double open = out[k - 1].value - I[p] - cost;
      if (open > nin[k].value) {
        nin[k] = out[k - 1];
        nin[k].value = open;
        nin[k].intervals.emplace_back(x[p], x[p]);
      }
      const double close = in[k].value + I[p] - cost;
      if (close > nout[k].value) {
        nout[k] = in[k];
        nout[k].value = close;
        nout[k].intervals.back().second = x[p];
      }
    }
    in = std::move(nin);
    out = std::move(nout);
  }
  Candidate best;
  for (int k = 1; k <= K; ++k)
    if (out[k].value > best.value) best = out[k];

  rep.witness = best.intervals;
  rep.margin = best.value;
  rep.margins.emplace_back("best_interval_union", best.value);
  rep.verdict = best.value > 0.0 ? Verdict::holds : Verdict::fails;
  return rep;
}

AssumptionReport check_h6_sufficient(const DoubleWell& well, const Forcing& forcing,
                                     double C_Omega) {
  if (!well.balanced()) throw ConfigError("well", "check_h6 needs a balanced double well");
  if (!(nodal_integral(forcing) > 0.0))
    throw ConfigError("precondition", "int g > 0 is required before testing uniqueness");
  const CrossSection& s = forcing.section();
  const double cw = well.c_W();
  const double gmin = forcing.g_min(), gmax = forcing.g_max();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  AssumptionReport rep;
  rep.assumption = "H6";
  rep.notes.push_back("(i) prescribed-curvature criterion: not evaluated");
  rep.notes.push_back(
      "n = 2: the relative isoperimetric constant is degenerate; C_Omega taken from the "
      "configuration");

  // n = 2 and g > 0
  const double m2 = gmin;
  const bool ok2 = gmin > 0.0;
  rep.margins.emplace_back("ii", m2);

  // min g <= 0 and osc g < C_Omega c_W 2 / |Omega|
  const double m3 = C_Omega * cw * 2.0 / s.length - (gmax - gmin);
  const bool ok3 = gmin <= 0.0 && m3 > 0.0;
  rep.margins.emplace_back("iii", gmin <= 0.0 ? m3 : nan);

  // needs n > 2
  rep.margins.emplace_back("iv", nan);
  rep.notes.push_back("(iv) requires n > 2: not applicable");

  // min (g^2 - |g'|) > 0 with g > 0
  double m5 = std::numeric_limits<double>::infinity();
  const double h = s.dy();
  for (int i = 0; i < s.nodes; ++i) {
    double d;
    if (i == 0)
      d = (forcing.g(1) - forcing.g(0)) / h;
    else if (i == s.nodes - 1)
      d = (forcing.g(i) - forcing.g(i - 1)) / h;
    else
      d = (forcing.g(i + 1) - forcing.g(i - 1)) / (2 * h);
    m5 = std::min(m5, forcing.g(i) * forcing.g(i) - std::abs(d));
  }
  const bool ok5 = gmin > 0.0 && m5 > 0.0;
  rep.margins.emplace_back("v", m5);

  if (ok2) {
    rep.condition = "ii";
    rep.margin = m2;
  } else if (ok3) {
    rep.condition = "iii";
    rep.margin = m3;
  } else if (ok5) {
    rep.condition = "v";
    rep.margin = m5;
  }
  rep.verdict = rep.condition.empty() ? Verdict::undetermined : Verdict::holds;
  return rep;
}

}  // namespace sfront
