// Exception types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace graze {

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid parameter values or malformed configuration input.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// No section crossing found within the configured integration horizon.
class NoSectionCrossing : public Error {
  public:
    using Error::Error;
};

/// The flow left the declared smooth-extension region |x| <= halfwidth.
class ExtensionExceeded : public Error {
  public:
    using Error::Error;
};

/// A section crossing was located but is tangential (|F| below threshold),
/// so it can be neither accepted as a maximum nor skipped as a minimum.
class TangentialCrossing : public Error {
  public:
    using Error::Error;
};

/// The incoming-branch preimage under the virtual map could not be found.
class InverseNotFound : public Error {
  public:
    using Error::Error;
};

/// A finite-difference stencil point left the extension region.
class StencilOutOfDomain : public Error {
  public:
    using Error::Error;
};

/// Newton iteration failed to converge within the iteration cap.
class NoConvergence : public Error {
  public:
    using Error::Error;
};

/// Newton matrix numerically singular (expected exactly at resonance).
class SingularJacobian : public Error {
  public:
    using Error::Error;
};

/// Stability requested too close to grazing (D P_virt numerically singular).
class TooCloseToGrazing : public Error {
  public:
    using Error::Error;
};

/// Branch continuation lost the solution after repeated step halvings.
class BranchLost : public Error {
  public:
    using Error::Error;
};

/// Continuation left the configured near-grazing box.
class LeftNeighbourhood : public Error {
  public:
    using Error::Error;
};

/// Two-parameter curve continuation lost the solution.
class CurveLost : public Error {
  public:
    using Error::Error;
};

/// Rank drop of the augmented Jacobian; no continuation tangent.
class TangentDegenerate : public Error {
  public:
    using Error::Error;
};

/// Fixed-point tracking for the grazing condition failed.
class FixedPointLost : public Error {
  public:
    using Error::Error;
};

/// No resonance of the requested kind inside the search window.
class NoResonanceInRange : public Error {
  public:
    using Error::Error;
};

/// Root bracketing failed where theory guarantees a sign change.
class BracketFailed : public Error {
  public:
    using Error::Error;
};

/// Input data are not at the requested codimension-two point.
class NotAtResonance : public Error {
  public:
    using Error::Error;
};

/// An unfolding denominator (s+ or s-) vanishes.
class DegenerateDenominator : public Error {
  public:
    using Error::Error;
};

/// The supplied point is not on the grazing set (requires F < 0 there).
class NotGrazing : public Error {
  public:
    using Error::Error;
};

/// Impact accumulation: too many impacts within one forcing period.
class ChatterStall : public Error {
  public:
    using Error::Error;
};

} // namespace graze
