#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace volind {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
  public:
    using Error::Error;
};

/// Iterative method failed to converge, or a sampling budget ran out.
class NumericalError : public Error {
  public:
    using Error::Error;
};

class RejectionBudgetExhausted : public NumericalError {
  public:
    explicit RejectionBudgetExhausted(std::uint64_t attempts)
        : NumericalError("rejection budget exhausted after " + std::to_string(attempts) +
                         " attempts"),
          attempts_(attempts) {}

    std::uint64_t attempts() const noexcept { return attempts_; }

  private:
    std::uint64_t attempts_;
};

/// A checked property of a constructed object does not hold.
class InvariantViolation : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

/// Malformed or unknown configuration input.
class ConfigError : public Error {
  public:
    using Error::Error;
};

}  // namespace volind
