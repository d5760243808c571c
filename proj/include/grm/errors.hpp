#pragma once

#include <stdexcept>
#include <string>

namespace grm {

// Mismatched array/matrix extents (item count vs response length etc.).
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Two record sets that should share keys (item ids, replicate ids) do not.
struct PairingError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// An item column with fewer than two observed categories.
struct DegenerateItemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The all-categories-present resimulation rule could not be satisfied.
struct SimulationInfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inner Newton search for a posterior mode did not converge.
struct ModeFindingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Per-item complete-data maximization failed (non-definite curvature).
struct ItemUpdateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed CSV/JSON input; message carries file/line/field context.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace grm
