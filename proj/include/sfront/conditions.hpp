#pragma once

// Constructive checks of the solvability hypotheses on the forcing: the
// existence of a set A with int_A g > c_W Per(A, Omega), and the sufficient
// conditions for a unique sharp traveling wave.

#include <string>
#include <utility>
#include <vector>

#include "sfront/model.hpp"

namespace sfront {

enum class Verdict { holds, fails, undetermined };
std::string to_string(Verdict v);

struct AssumptionReport {
  std::string assumption;  ///< "H4" or "H6"
  Verdict verdict = Verdict::undetermined;
  std::vector<std::pair<double, double>> witness;  ///< intervals of A (H4)
  std::string condition;  ///< sufficient condition that holds (H6), e.g. "ii"
  double margin = 0.0;    ///< H4: int_A g - c_W Per(A); H6: margin of `condition`
  std::vector<std::pair<std::string, double>> margins;  ///< every evaluated condition
  std::vector<std::string> notes;
};

struct H4Options {
  int refine = 4;         ///< endpoint grid = cross-section nodes refined this many times
  int max_intervals = 3;
};

/// Maximises int_A g - c_W Per(A, Omega) over unions of at most
/// `max_intervals` intervals (A = Omega included, with Per = 0).
AssumptionReport check_h4(const DoubleWell& well, const Forcing& forcing, H4Options opts = {});

/// Conditions (ii), (iii), (iv), (v) in that order with n = 2; the first one
/// that holds decides. Throws ConfigError("precondition") if int g <= 0.
AssumptionReport check_h6_sufficient(const DoubleWell& well, const Forcing& forcing,
                                     double C_Omega = 1.0);

}  // namespace sfront
