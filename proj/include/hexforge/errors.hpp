#pragma once

#include <stdexcept>
#include <string>

namespace hexforge {

// Base class for all domain errors thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- grid construction ---
struct NotFactorOfThree : Error {
  explicit NotFactorOfThree(int n)
      : Error("subdivision " + std::to_string(n) + " is NOT a factor of 3") {}
};
struct DegenerateTriangle : Error {
  using Error::Error;
};
struct InvalidGrid : Error {
  using Error::Error;
};

// --- physics ---
struct EmptyAnchorSet : Error {
  using Error::Error;
};
struct CoincidentEndpoints : Error {
  using Error::Error;
};
struct NonFiniteState : Error {
  using Error::Error;
};
struct NoConvergence : Error {
  double residual;
  NoConvergence(const std::string& what, double r) : Error(what), residual(r) {}
};

// --- planarization ---
struct DegenerateFace : Error {
  using Error::Error;
};
struct LengthMismatch : Error {
  using Error::Error;
};

// --- fabrication ---
struct OrientationConflict : Error {
  using Error::Error;
};
struct OppositeNormals : Error {
  using Error::Error;
};
struct SelfIntersectingWall : Error {
  using Error::Error;
};
struct DegeneratePyramid : Error {
  using Error::Error;
};

// --- io / config ---
struct IoError : Error {
  using Error::Error;
};
struct MalformedMesh : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
struct InvalidConfig : Error {
  using Error::Error;
};

}  // namespace hexforge
