#pragma once

#include <stdexcept>
#include <string>

namespace corridor {

/// Argument outside the model's domain (position not in [0,1], rate not in (0,1), ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The width profile fails the bottleneck assumption. The message carries a
/// diagnostic (boundary minimum, tied minima, nonpositive width, ...).
class AssumptionViolated : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested flux density lies above the fold (j > 1/4): no point on the
/// critical manifold carries it.
class NoRealRoot : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Entrance boundary point below the admissible band: the layer flow escapes
/// to infinity instead of reaching the critical manifold.
class InadmissibleStart : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exit boundary point above the admissible band.
class InadmissibleEnd : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The requested special orbit ends on the fold line; its endpoint value is
/// undefined for rates inside the canard band.
class UndefinedInsideCanardBand : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation invoked with a label it does not support.
class OutOfScope : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched array sizes between a solution and its problem data.
class DimensionMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace corridor
