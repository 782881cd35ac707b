#pragma once

#include <stdexcept>
#include <string>

namespace megh {

// Dataset or model specification failed a contract check (bad input file,
// rank-deficient design, invalid parameter values supplied by the user).
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical routine failed to converge (quadrature refinement exhausted,
// singular Hessian where an inverse is mandatory).
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace megh
