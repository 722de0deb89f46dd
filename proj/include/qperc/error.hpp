#pragma once

#include <stdexcept>
#include <string>

namespace qperc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Index outside the lattice.
class RangeError : public Error {
public:
    using Error::Error;
};

/// Problem too large for the requested method.
class ResourceError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration or input document.
class ValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// A required input file or directory is absent.
class DependencyError : public IoError {
public:
    using IoError::IoError;
};

/// Time evolution failed to converge. Carries the identity of the trial
/// when raised from the ensemble driver.
class PropagationError : public Error {
public:
    explicit PropagationError(const std::string& what, double probability = -1.0,
                              long trial = -1)
        : Error(what), probability_(probability), trial_(trial) {}

    double probability() const noexcept { return probability_; }
    long trial() const noexcept { return trial_; }

private:
    double probability_;
    long trial_;
};

} // namespace qperc
