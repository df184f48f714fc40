#pragma once

#include <stdexcept>
#include <string>

namespace bgf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (e.g. a gamma pole).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature did not reach the requested tolerance.
class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double achieved_error)
        : Error(what + " (achieved error bound " + std::to_string(achieved_error) + ")"),
          achieved_error_(achieved_error) {}
    double achieved_error() const noexcept { return achieved_error_; }

private:
    double achieved_error_;
};

/// Jump cutoff too small: the compound-Poisson rate is not simulable.
class RateOverflow : public Error {
public:
    RateOverflow(const std::string& what, double rate)
        : Error(what + " (rate " + std::to_string(rate) + ")"), rate_(rate) {}
    double rate() const noexcept { return rate_; }

private:
    double rate_;
};

/// Lévy skeleton too short for the exponential functional tail to be negligible.
class HorizonInsufficient : public Error {
public:
    HorizonInsufficient(const std::string& what, double tail_bound)
        : Error(what + " (tail bound " + std::to_string(tail_bound) + ")"), tail_bound_(tail_bound) {}
    double tail_bound() const noexcept { return tail_bound_; }

private:
    double tail_bound_;
};

/// Caller broke a documented precondition on the shape of an input path.
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// Query beyond the simulated level horizon.
class OutOfHorizon : public Error {
public:
    using Error::Error;
};

/// Cell budget of a growth-fragmentation run exhausted.
class BudgetExceeded : public Error {
public:
    BudgetExceeded(const std::string& what, std::size_t cells_simulated)
        : Error(what + " (" + std::to_string(cells_simulated) + " cells simulated)"),
          cells_simulated_(cells_simulated) {}
    std::size_t cells_simulated() const noexcept { return cells_simulated_; }

private:
    std::size_t cells_simulated_;
};

/// Configuration or experiment registry problem.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace bgf
