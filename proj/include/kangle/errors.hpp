#pragma once

#include <stdexcept>
#include <string>

namespace kangle {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller violated an API contract (mismatched jets, bad index, wrong n).
class UsageError : public Error {
public:
    using Error::Error;
};

/// Evaluation point outside the domain of a chart or operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A jet operation hit a pole or branch point (log/sqrt of a non-positive
/// constant term, division by a jet with zero constant term).
class SingularityError : public Error {
public:
    SingularityError(const std::string& what, double offending)
        : Error(what), offending_(offending) {}
    double offending_value() const { return offending_; }

private:
    double offending_;
};

/// dF does not have full rank at the requested point.
class NotAnImmersionError : public Error {
public:
    using Error::Error;
};

/// Eigenstructure could not be paired within tolerance.
class DegeneracyError : public Error {
public:
    using Error::Error;
};

/// Sign conventions could not be pinned down uniquely.
class ConventionError : public Error {
public:
    using Error::Error;
};

} // namespace kangle
