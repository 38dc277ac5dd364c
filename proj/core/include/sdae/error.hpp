#pragma once

#include <stdexcept>
#include <string>

namespace sdae {

/// Failure categories surfaced by the library. The CLI maps these onto
/// process exit codes, and ensemble runs collect them per path.
enum class ErrorCode {
  InvalidPoint,          // point fails manifold membership tolerance
  DegenerateRetraction,  // retraction basin violated (e.g. origin for sphere)
  UnsupportedMetric,     // manifold has no distance / metric data
  ChartDomain,           // point outside chart domain
  SingularConstraint,    // D2h (numerically) singular in index-1 reduction
  DegenerateDirection,   // |D2Y . a| below the denominator guard
  CutLocusProximity,     // constraint image too close to the cut locus of p
  StiffnessCap,          // b doubled past b_cap without meeting epsilon
  FallbackFailure,       // gradient-descent fallback did not reach gd_tol
  LocalMinimum,          // flat gradient with |Y| above tolerance
  SamplingFailure,       // could not draw valid samples (empty domain)
  SchemeMismatch,        // scheme requires generator data the problem lacks
  ConfigInvalid,         // solver configuration violates its invariants
  UnknownProblem,        // registry lookup failed
};

const char* error_code_name(ErrorCode code);

class SdaeError : public std::runtime_error {
 public:
  SdaeError(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw SdaeError(code, what);
}

}  // namespace sdae
