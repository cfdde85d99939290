#pragma once

// Hausdorff dimensions of the escaping set Ω_λ and of the hyperbolic part,
// their truncated approximations Λ_K, and the two cylinder-sum identities.

#include <cstddef>
#include <string_view>

namespace lambda_thermo {

/// Zero of the pressure: 1 for λ <= 1/2, else -log 4 / log(λ(1-λ)).
double t1(double lambda);

/// Same zero located by bisection of pressure_closed on [0.01, 4].
double t1_root_find(double lambda, double tol = 1e-12);

/// dim_H(Ω_λ): -log 4 / log(λ(1-λ)) for λ <= 1/2, else 1.
double dim_escaping(double lambda);

/// dim_hyp(F_λ) = dim_escaping(1-λ).
double dim_hyperbolic(double lambda);

enum class DimensionMethod { closed_form, root_find };

std::string_view to_string(DimensionMethod m);
DimensionMethod parse_dimension_method(std::string_view name);

struct DimensionReport {
    double lambda = 0.0;
    double dim_escaping = 0.0;
    double dim_hyperbolic = 0.0;
    double t1 = 0.0;
    DimensionMethod method = DimensionMethod::closed_form;
};

/// With root_find, every entry comes from bisection on the pressure
/// (dim_hyperbolic(λ) = t1(λ), dim_escaping(λ) = t1(1-λ)).
DimensionReport dimension_report(double lambda, DimensionMethod method = DimensionMethod::closed_form);

/// First zero of t ↦ log ρ(B^t_K): bisection on [1e-3, 8]. Throws DomainError
/// with the endpoint values when the bracket does not change sign.
double dim_truncated(double lambda, std::size_t K, double tol = 1e-8);

struct CylinderSum {
    double log_via_A = 0.0;  ///< log(w·(A^t_K)^{n-1}·1ᵀ)
    double log_via_B = 0.0;  ///< log(1·(B^t_K)^{n-1}·wᵀ)
    /// |via_A - via_B| / max(via_A, via_B)
    double rel_diff = 0.0;
    /// log_via_B / n
    double pressure_estimate = 0.0;
};

/// Σ over length-n words with symbols <= K of |[w]|^t, computed both ways;
/// w_j = |W_j|^t. Vectors are rescaled each step, so only logs are kept.
CylinderSum cylinder_sum(double lambda, double t, std::size_t n, std::size_t K);

} // namespace lambda_thermo
