#pragma once

#include <stdexcept>
#include <string>

namespace jamset {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid input: malformed specs, violated preconditions.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Half-edge total is odd, so no pairing exists.
class ParityError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// Quadrature or root finding failed to reach the requested tolerance.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Simple-graph rejection sampling ran out of attempts.
class RejectionExhausted : public Error {
public:
    RejectionExhausted(const std::string& what, long attempts)
        : Error(what), attempts_(attempts) {}
    long attempts() const noexcept { return attempts_; }

private:
    long attempts_;
};

// lambda = infinity: the limit formulas have no meaning there.
class UnsupportedRegime : public Error {
public:
    using Error::Error;
};

} // namespace jamset
