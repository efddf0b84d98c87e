#pragma once

#include <stdexcept>

namespace koopcheck {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unknown built-in or missing named resource.
struct NotFoundError : Error { using Error::Error; };
// Malformed system definition (dimensions, rank-deficient input matrix).
struct InvalidSystemError : Error { using Error::Error; };
struct InvalidArgumentError : Error { using Error::Error; };
// Non-finite values produced while evaluating dynamics or derivatives.
struct EvaluationError : Error { using Error::Error; };
// Degenerate or rank-deficient data in an unregularized fit.
struct IllConditionedError : Error { using Error::Error; };
// A precondition on the observable space does not hold.
struct AssumptionViolatedError : Error { using Error::Error; };
// Bracket nesting deeper than the supported limit.
struct DepthLimitError : Error { using Error::Error; };
struct IOError : Error { using Error::Error; };

}  // namespace koopcheck
