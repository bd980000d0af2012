#pragma once

#include <stdexcept>
#include <string>

namespace cspkit {

// Invalid instance, assignment, or schema content.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operation parameters outside their domain.
struct ParameterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Zero-edge instance handed to a value operation.
struct DegenerateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exact-solver / enumeration cap exceeded.
struct SizeLimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Graph fails a structural precondition (non-regular, disconnected, cyclic).
struct StructureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Randomized construction exhausted its retry budget.
struct ConstructionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An internal invariant failed (should be unreachable on valid inputs).
struct InternalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cspkit
