#pragma once

#include <stdexcept>
#include <string>

namespace masolve {

/// Input point sets that do not span the plane (too few points, all collinear).
class DegenerateInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Boundary samples of a domain that cannot bound a strictly convex region.
class DegenerateDomain : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutsideDomain : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested mass is not below the total mass of the slope density.
class MassExceedsTotal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The solvability gap between source mass and slope-density mass is violated.
class AssumptionViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Even the a priori lowest height cannot reach the requested vertex mass.
class BracketFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace masolve
