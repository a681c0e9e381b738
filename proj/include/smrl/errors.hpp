#pragma once

#include <stdexcept>
#include <string>

namespace smrl {

class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

// Non-finite feature values, unnormalizable densities, states outside the domain.
class DomainError : public Error {
   public:
    using Error::Error;
};

class ShapeError : public Error {
   public:
    using Error::Error;
};

// Factorization failures and similar; carries a condition estimate when known.
class NumericalError : public Error {
   public:
    NumericalError(const std::string& what, double condition_estimate = 0.0)
        : Error(what), condition_estimate_(condition_estimate) {}
    double condition_estimate() const { return condition_estimate_; }

   private:
    double condition_estimate_;
};

class ArgumentError : public Error {
   public:
    using Error::Error;
};

class UnsupportedDimension : public Error {
   public:
    using Error::Error;
};

class ConfigError : public Error {
   public:
    using Error::Error;
};

}  // namespace smrl
