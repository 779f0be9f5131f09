#pragma once

#include <stdexcept>
#include <string>

namespace qsl {

/// Numeric tolerances shared by the linear-algebra and propagation layers.
///
/// Matrix tolerances are relative to max(1, max|entry|) so that Hamiltonians
/// expressed in rad/s (entries of order 1e10) are checked on the same footing
/// as dimensionless spin operators.
struct NumericPolicy {
    double hermitian_tol = 1e-12;
    double unitary_tol = 1e-10;
    double norm_tol = 1e-10;
    double imag_residue_tol = 1e-12;
};

inline constexpr NumericPolicy kDefaultPolicy{};

/// A caller broke a documented precondition (non-Hermitian generator, k outside [0,1], ...).
class ContractError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain on which a closed form is defined.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Root finder, fit, or other numeric procedure could not produce an answer.
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid user-supplied configuration (units, missing keys, integrator step).
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace qsl
