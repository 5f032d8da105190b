#pragma once

#include <stdexcept>
#include <string>

namespace rankot {

// Precondition violations (bad shapes, invalid flags, non-finite input).
class invalid_argument_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Iterative solver stopped before reaching the requested tolerance.
class convergence_error : public std::runtime_error {
public:
    convergence_error(const std::string& what, double achieved_violation, int iterations)
        : std::runtime_error(what),
          achieved_violation_(achieved_violation),
          iterations_(iterations) {}

    double achieved_violation() const noexcept { return achieved_violation_; }
    int iterations() const noexcept { return iterations_; }

private:
    double achieved_violation_;
    int iterations_;
};

// Non-finite values encountered mid-computation.
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace rankot
