#pragma once

#include <stdexcept>
#include <string>

namespace nsfd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A state lies outside the closed positive quadrant where an operation is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A split system or model failed validation.
class ConstructionError : public Error {
public:
    using Error::Error;
};

/// A classical integrator stage produced NaN or infinity.
class NonFiniteError : public Error {
public:
    using Error::Error;
};

/// An equilibrium's family tag disagrees with its coordinates.
class FamilyMismatch : public Error {
public:
    using Error::Error;
};

/// The interior equilibrium is not linearly asymptotically stable.
class NotStableError : public Error {
public:
    using Error::Error;
};

/// The RK4 reference solution left the finite range.
class ReferenceUnavailable : public Error {
public:
    using Error::Error;
};

}  // namespace nsfd
