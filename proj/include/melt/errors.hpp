#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace melt {

// Base class for all library failures. Subclasses distinguish caller bugs
// (contract_error), bad input files (parse_error and friends), and numerical
// breakdown discovered at runtime.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Precondition violated by the caller: dimension mismatch, out-of-domain
// argument, unusable option value.
class contract_error : public error {
public:
    explicit contract_error(const std::string& what) : error(what) {}
};

// Malformed Matrix Market input. Carries the 1-based line number where
// parsing gave up.
class parse_error : public error {
public:
    parse_error(const std::string& what, std::size_t line)
        : error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// A `general` Matrix Market file whose pattern or values are not symmetric.
class symmetry_error : public error {
public:
    explicit symmetry_error(const std::string& what) : error(what) {}
};

// Matrix Market header names a format or field this library does not read
// (array layout, complex or pattern fields).
class unsupported_format_error : public error {
public:
    explicit unsupported_format_error(const std::string& what) : error(what) {}
};

// Cholesky pivot was zero or negative; reports which pivot failed.
class not_positive_definite_error : public error {
public:
    not_positive_definite_error(const std::string& what, std::size_t pivot)
        : error(what + " (pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}
    std::size_t pivot() const { return pivot_; }

private:
    std::size_t pivot_;
};

// Moment vector handed to the MaxEnt fitter violates its domain (mu_0 != 1,
// or some mu_i outside (0, 1]).
class constraint_domain_error : public error {
public:
    explicit constraint_domain_error(const std::string& what) : error(what) {}
};

// Non-finite value appeared during fitting; names the coefficient whose
// update produced it.
class numerical_failure_error : public error {
public:
    numerical_failure_error(const std::string& what, std::size_t coefficient)
        : error(what + " (coefficient " + std::to_string(coefficient) + ")"),
          coefficient_(coefficient) {}
    std::size_t coefficient() const { return coefficient_; }

private:
    std::size_t coefficient_;
};

// Feature that is enumerated but deliberately not implemented (MUBs probes).
class unimplemented_error : public error {
public:
    explicit unimplemented_error(const std::string& what) : error(what) {}
};

// Iterative solver (CG) stopped without reaching its tolerance; carries the
// final residual norm.
class iterative_solve_error : public error {
public:
    iterative_solve_error(const std::string& what, double residual)
        : error(what + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

// Requested quantity has no defined value (relative error against exact 0).
class undefined_value_error : public error {
public:
    explicit undefined_value_error(const std::string& what) : error(what) {}
};

} // namespace melt
