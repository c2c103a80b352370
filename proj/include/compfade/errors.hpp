#pragma once

#include <stdexcept>
#include <string>

namespace compfade {

/// Argument outside the mathematical domain of a function or model.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// True result is not representable as a finite double.
class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

/// Iterative method ran out of budget before meeting its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A user-supplied callback produced NaN.
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

[[noreturn]] void throw_domain(const std::string& where, const std::string& what);

void require_finite(double v, const char* where, const char* name);
void require_positive(double v, const char* where, const char* name);
void require_non_negative(double v, const char* where, const char* name);

}  // namespace detail
}  // namespace compfade
