#pragma once

#include <stdexcept>
#include <string>

#include "fermigas/lattice.hpp"

namespace fermigas {

// Precondition violated by the caller (zero shift, point outside a lens, odd order, ...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical input left the domain where the computation is defined (non-finite V̂, non-SPD matrix).
class NumericDomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// An iterative or adaptive scheme did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double achieved, Momentum worst_shift = {})
        : std::runtime_error(what), achieved_(achieved), worst_shift_(worst_shift) {}

    double achieved() const noexcept { return achieved_; }
    const Momentum& worst_shift() const noexcept { return worst_shift_; }

private:
    double achieved_;
    Momentum worst_shift_;
};

// A computation would exceed a configured size limit.
class ResourceLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A computed quantity violated a property that must hold exactly (e.g. n(q) outside [0, 1]).
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace fermigas
