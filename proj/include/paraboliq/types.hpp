#pragma once

#include <complex>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace paraboliq {

// Pointwise geometry runs in extended precision. Sampled points reach
// |z| ~ 1e-300 and |z|^4 must stay representable.
using Real = long double;
using Complex = std::complex<Real>;

static_assert(std::numeric_limits<Real>::max_exponent10 >= 4000,
              "paraboliq needs an extended-range long double (x87 80-bit or IEEE quad)");

/// A precondition of an operation was violated by the caller.
struct ContractViolation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A point lies outside the closed polydisc of a chart.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Evaluation requested on the thin set {S = 0}.
struct SingularPointError : std::domain_error {
  using std::domain_error::domain_error;
};

/// A quantity left the range of the working precision.
struct OverflowError : std::overflow_error {
  using std::overflow_error::overflow_error;
};

/// An integrand returned a non-finite value at a sample or quadrature node.
struct PoisonedSampleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedDimension : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace paraboliq
