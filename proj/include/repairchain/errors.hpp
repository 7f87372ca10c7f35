#pragma once

#include <stdexcept>
#include <string>

namespace repairchain {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model specification that violates the jump-distribution invariants.
class InvalidSpec : public Error {
public:
    explicit InvalidSpec(const std::string& what) : Error("invalid model spec: " + what) {}
};

/// Raised when an analysis is requested for a chain of the wrong recurrence class.
class DomainError : public Error {
public:
    using Error::Error;
};

class NotTransient : public DomainError {
public:
    NotTransient() : DomainError("chain is recurrent: the last exit time is infinite almost surely") {}
};

class NotNullRecurrent : public DomainError {
public:
    NotNullRecurrent() : DomainError("operation requires a null-recurrent chain") {}
};

class NotPositiveRecurrent : public DomainError {
public:
    NotPositiveRecurrent() : DomainError("operation requires a positive-recurrent chain") {}
};

class OutOfRadius : public DomainError {
public:
    explicit OutOfRadius(double x)
        : DomainError("tilt point " + std::to_string(x) + " lies outside the convergence region of G") {}
};

class NoConvergence : public DomainError {
public:
    explicit NoConvergence(const std::string& what) : DomainError("no convergence: " + what) {}
};

}  // namespace repairchain
