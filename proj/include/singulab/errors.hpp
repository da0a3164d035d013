#pragma once

#include <stdexcept>
#include <string>

namespace singulab {

// Input point is not on the unit sphere (within the documented tolerance).
struct NonUnitInput : std::invalid_argument {
  explicit NonUnitInput(const std::string& what) : std::invalid_argument(what) {}
};

struct UnsupportedOrder : std::invalid_argument {
  explicit UnsupportedOrder(const std::string& what) : std::invalid_argument(what) {}
};

struct OutOfDomain : std::invalid_argument {
  explicit OutOfDomain(const std::string& what) : std::invalid_argument(what) {}
};

// A trial whose numerical audit failed (tangency suspicion, ill-conditioned
// Jacobian, unresolved grid cell, ...). Callers discard the trial and count it.
struct DegenerateSample : std::runtime_error {
  explicit DegenerateSample(const std::string& what) : std::runtime_error(what) {}
};

// Height direction degenerate along a curve; retry with a fresh direction.
struct DegenerateDirection : std::runtime_error {
  explicit DegenerateDirection(const std::string& what) : std::runtime_error(what) {}
};

struct SingularKernel : std::runtime_error {
  explicit SingularKernel(const std::string& what) : std::runtime_error(what) {}
};

struct IllConditioned : std::runtime_error {
  explicit IllConditioned(const std::string& what) : std::runtime_error(what) {}
};

// A hard invariant was violated (deterministic count bound, discard budget).
// These are never swallowed: they indicate a bug or a broken configuration.
struct AuditFailure : std::logic_error {
  explicit AuditFailure(const std::string& what) : std::logic_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace singulab
