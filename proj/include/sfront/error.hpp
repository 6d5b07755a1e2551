#pragma once

#include <stdexcept>
#include <string>

namespace sfront {

/// Error raised by library operations. `code()` is a short machine-readable
/// tag ("window-too-small", "nonzero-at-origin", ...) that the CLI forwards
/// into its error record.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Configuration / input validation failure (maps to CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure during a run (maps to CLI exit code 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

inline void ensure(bool cond, const char* code, const std::string& msg) {
  if (!cond) throw Error(code, msg);
}

}  // namespace sfront
