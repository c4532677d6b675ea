#pragma once

#include <stdexcept>
#include <string>

namespace glmqs {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input document; what() carries "<origin>:<line>: message".
struct ParseError : Error {
  using Error::Error;
};

// A tableau (or other structured object) violates a structural invariant.
struct StructureError : Error {
  using Error::Error;
};

// Newton failed on one internal stage. Carries the stage index (1-based)
// and the last weighted residual norm.
struct StageFailure : Error {
  int stage;
  double residual;
  StageFailure(int stage_, double residual_, const std::string& msg)
      : Error(msg), stage(stage_), residual(residual_) {}
};

struct FactorizationError : Error {
  using Error::Error;
};

// Self-refined reference hit its step cap before reaching the target gap.
struct ReferenceFailure : Error {
  double achieved_gap;
  ReferenceFailure(double gap, const std::string& msg) : Error(msg), achieved_gap(gap) {}
};

// Root finding for a tableau assembly did not reach the residual target.
struct ConstructionFailure : Error {
  double best_residual;
  ConstructionFailure(double best, const std::string& msg) : Error(msg), best_residual(best) {}
};

}  // namespace glmqs
