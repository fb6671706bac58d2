#pragma once

#include <stdexcept>
#include <string>

namespace infopool {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input: out-of-range probabilities, malformed structures, bad sizes.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Parameters are incoherent, singular, or sit on a degenerate boundary.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

/// Problem size exceeds what an exact routine is allowed to enumerate.
class DimensionError : public Error {
public:
    using Error::Error;
};

}  // namespace infopool
