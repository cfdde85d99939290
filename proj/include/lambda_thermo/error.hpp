#pragma once

#include <stdexcept>
#include <string>

namespace lambda_thermo {

/// Input outside an operation's domain (bad λ, x ∉ (0,1], p below the
/// conformal pressure, ...). The CLI maps this to exit code 2.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A symbol sequence that violates e_{k+1} >= e_k - 1.
class InadmissibleWord : public DomainError {
public:
    using DomainError::DomainError;
};

/// An iterative method stopped before reaching its tolerance.
class NonConvergence : public std::runtime_error {
public:
    NonConvergence(const std::string& what, double last_residual)
        : std::runtime_error(what), residual_(last_residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

} // namespace lambda_thermo
