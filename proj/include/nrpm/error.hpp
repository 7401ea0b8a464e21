#pragma once

#include <stdexcept>
#include <string>

namespace nrpm {

/// Root of all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed text input (experiment files, spec files, model strings).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Well-formed input that violates a data-model invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Argument outside an operation's precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Modeling could not proceed: too few data points, missing metric, etc.
class ModelingError : public Error {
public:
    using Error::Error;
};

}  // namespace nrpm
