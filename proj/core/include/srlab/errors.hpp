#pragma once

#include <stdexcept>
#include <string>

namespace srlab {

/// Base class for all srlab errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
  using Error::Error;
};
struct ArgumentError : Error {
  using Error::Error;
};

/// A vector field contains terms of weighted degree < -1, so the ambient
/// coordinates cannot be privileged for the given weights.
struct NotPrivilegedError : Error {
  using Error::Error;
};
/// Remainder of the weighted split does not vanish at the origin.
struct BadCenteringError : Error {
  using Error::Error;
};

/// Bracket enumeration up to the requested depth did not span the tangent
/// space. Not a disproof of the Hormander condition.
struct HormanderUndecided : Error {
  int depth;
  explicit HormanderUndecided(int d)
      : Error("bracket generation not verified up to depth " + std::to_string(d)), depth(d) {}
};

struct NotHorizontal : Error {
  using Error::Error;
};
struct FrameExtensionFailed : Error {
  using Error::Error;
};
struct DomainEscape : Error {
  using Error::Error;
};
struct WindowError : Error {
  using Error::Error;
};
struct LiftBaseError : Error {
  using Error::Error;
};
struct GateFailed : Error {
  using Error::Error;
};
struct OracleConditioning : Error {
  using Error::Error;
};
struct EstimateFailed : Error {
  using Error::Error;
};
struct DensityError : Error {
  using Error::Error;
};
struct PlanError : Error {
  using Error::Error;
};

}  // namespace srlab
