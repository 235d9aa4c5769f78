// Error types shared by every module.
//
// Validation failures (bad input, violated preconditions) and numerical
// non-convergence are kept distinct so that the command-line front end can
// map them onto different exit codes.
#pragma once

#include <stdexcept>
#include <string>

namespace rodlimit {

// Input or precondition violation. The message names the failing invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An iterative method stopped before reaching its tolerance.
class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(const std::string &what, double lastResidual, int iterations)
        : std::runtime_error(what), m_lastResidual(lastResidual), m_iterations(iterations) {}
    double lastResidual() const { return m_lastResidual; }
    int iterations() const { return m_iterations; }

private:
    double m_lastResidual;
    int m_iterations;
};

// Throws a ValidationError carrying `message` when `condition` is false.
inline void require(bool condition, const std::string &message) {
    if (!condition) throw ValidationError(message);
}

} // namespace rodlimit
