#pragma once

#include <stdexcept>
#include <string>

namespace matsqrt {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

// Non-finite entries, non-square input, bad configuration values.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

class SingularMatrix : public Error {
public:
    using Error::Error;
};

// An iterative routine hit its iteration cap without meeting its tolerance.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

// Overflow or NaN inside an iteration.
class NumericalError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace matsqrt
