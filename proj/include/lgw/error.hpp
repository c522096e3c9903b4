#pragma once

#include <stdexcept>
#include <string>

namespace lgw {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

/// A formula was evaluated outside the parameter range where it is defined.
class InvalidRegime : public Error {
public:
    using Error::Error;
};

/// The localized set T ∩ sB₂ is empty (min over the simplex of Q exceeds s²).
class EmptyIntersection : public Error {
public:
    using Error::Error;
};

class NonConvergence : public Error {
public:
    using Error::Error;
};

class CapExceeded : public Error {
public:
    using Error::Error;
};

class BoundNotMet : public Error {
public:
    using Error::Error;
};

class SignSearchExhausted : public Error {
public:
    using Error::Error;
};

class NoCrossing : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace lgw
