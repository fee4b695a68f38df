#pragma once

#include <stdexcept>
#include <string>

namespace mpcert {

/// Malformed input: wrong dimensions, non-finite entries, asymmetric forms.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A matrix required to be positive definite is not.
class DefinitenessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Riccati fixed-point iteration did not converge.
class NonStabilizableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatch sampling was asked for an unbounded region or control set.
class UnsupportedRegionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Level set requested for a singular form on a bounded region.
class DegenerateLevelSetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computed quantity violates a mathematical invariant it must satisfy.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace mpcert
