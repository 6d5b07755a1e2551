#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace sfront {

/// A selected wave speed with the method that produced it.
struct SpeedResult {
  double c = std::numeric_limits<double>::quiet_NaN();
  std::string method;
  double bracket_lo = std::numeric_limits<double>::quiet_NaN();
  double bracket_hi = std::numeric_limits<double>::quiet_NaN();
  double residual = 0.0;  ///< bracket half-width or slope standard error
  bool converged = false;
  std::string note;
  std::vector<std::pair<std::string, double>> diagnostics;

  void add(std::string name, double value) { diagnostics.emplace_back(std::move(name), value); }

  double diagnostic(const std::string& name) const {
    for (const auto& [k, v] : diagnostics)
      if (k == name) return v;
    return std::numeric_limits<double>::quiet_NaN();
  }
};

}  // namespace sfront
