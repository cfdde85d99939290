#pragma once

// Truncated weight matrices of the map, their characteristic polynomials,
// leading eigenpairs, and the closed-form pressure function.

#include "lambda_thermo/rational.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lambda_thermo {

enum class OperatorKind { A, B, AHat, BHat, D };

std::string_view to_string(OperatorKind kind);
OperatorKind parse_operator_kind(std::string_view name);

/// K×K nonnegative upper-Hessenberg matrix of the form
///
///     M(i,j) = w_i · q^{j - lo_i}   for j >= lo_i := max(i-1, 1)
///
/// (1-based), zero otherwise. Every kind fits this shape, which gives O(K)
/// matrix-vector products through running geometric sums.
class TruncatedOperator {
public:
    TruncatedOperator(OperatorKind kind, double lambda, double t,
                      std::vector<double> row_weights, double ratio);

    OperatorKind kind() const noexcept { return kind_; }
    std::size_t size() const noexcept { return row_weights_.size(); }
    double lambda() const noexcept { return lambda_; }
    double t() const noexcept { return t_; }
    double ratio() const noexcept { return ratio_; }
    std::span<const double> row_weights() const noexcept { return row_weights_; }

    /// 0-based entry access.
    double entry(std::size_t i, std::size_t j) const;

    /// out = vᵀ M.
    void apply_left(std::span<const double> v, std::span<double> out) const;
    /// out = M v.
    void apply_right(std::span<const double> v, std::span<double> out) const;

    std::vector<double> apply_left(std::span<const double> v) const;
    std::vector<double> apply_right(std::span<const double> v) const;

    /// Row-major dense copy; intended for tests and small K.
    std::vector<double> dense() const;

private:
    OperatorKind kind_;
    double lambda_;
    double t_;
    std::vector<double> row_weights_;
    double ratio_;
};

TruncatedOperator build(OperatorKind kind, std::size_t K, double lambda, double t);

/// Coefficients of α_K(s) = det(M̃_K - sI), M̃ = B^t_K / (1-λ)^t, in
/// ascending powers of s; only λ^t enters.
struct CharPoly {
    std::vector<double> coefficients;

    std::size_t degree() const { return coefficients.size() - 1; }
    double operator()(double s) const;
};

struct ExactCharPoly {
    std::vector<Rational> coefficients;

    std::size_t degree() const { return coefficients.size() - 1; }
    Rational operator()(const Rational& s) const;
};

/// Three-term recurrence α_K = -s α_{K-1} - s λ^t α_{K-2}, α_0 = 1, α_1 = 1 - s.
CharPoly char_poly(std::size_t K, double lambda, double t);
CharPoly char_poly_from_ratio(std::size_t K, double lambda_t);
ExactCharPoly char_poly_exact(std::size_t K, const Rational& lambda_t);

/// det(Ã_K - sI) == det(B̃_K - sI) as polynomials, decided by exact
/// fraction-free determinants at K+1 distinct rational points. Throws
/// DomainError when K exceeds `exact_bound`.
bool char_poly_equal_AB(std::size_t K, const Rational& lambda_t, std::size_t exact_bound = 12);

/// Floating fallback when λ^t is not supplied as a rational: compares the
/// Hessenberg characteristic polynomials of A and B coefficientwise at
/// relative tolerance `tol`.
bool char_poly_equal_AB(std::size_t K, double lambda, double t, double tol = 1e-10);

/// Characteristic polynomial det(M - sI) of a dense upper-Hessenberg matrix
/// (row-major), ascending coefficients, by Hyman's recurrence in doubles.
std::vector<double> hessenberg_char_poly(std::span<const double> matrix, std::size_t n);

/// Exact determinant of a square rational matrix (row-major).
Rational exact_determinant(std::vector<Rational> matrix, std::size_t n);

/// Exact dense Ã_K or B̃_K (entries divided by (1-λ)^t), row-major.
std::vector<Rational> exact_scaled_matrix(OperatorKind kind, std::size_t K, const Rational& lambda_t);

struct SpectralResult {
    double value = 0.0;
    /// Left Perron vector. Normalised so the first entry is 1 whenever the
    /// ratio max/first fits in a double; otherwise sup-normalised.
    std::vector<double> left_vector;
    bool first_normalized = true;
    long iterations = 0;
    /// ‖vM - value·v‖_∞ / (value · ‖v‖_∞)
    double residual = 0.0;
};

/// Leading eigenvalue by bisection on the subinvariance test: σ >= ρ(M)
/// iff the left shooting vector is positive with vM <= σv. Relative
/// accuracy `rel_tol` (clamped to a few ulps).
double perron_root(const TruncatedOperator& op, double rel_tol = 0.0);

/// Perron value plus a left eigenvector built by the backward column
/// recurrence, polished with power steps if the residual exceeds `tol`.
SpectralResult leading_eigen(const TruncatedOperator& op, double tol = 1e-12,
                             long max_iter = 1'000'000);

/// Plain power iteration on the left action with Collatz-Wielandt bounds
/// and Aitken extrapolation of the estimate. Independent of perron_root.
SpectralResult power_iteration(const TruncatedOperator& op, double tol = 1e-12,
                               long max_iter = 1'000'000);

double residual_of(const TruncatedOperator& op, std::span<const double> v, double value);

struct EigvecCheck {
    double r = 0.0;            ///< x / (λ^t (1-λ)^t)
    double v2_defect = 0.0;    ///< |v_2 - (r - λ^{-t})| / |v_2|
    double v3_defect = 0.0;    ///< |v_3 - (r² - (1 + λ^{-t}) r)| / |v_3|
    double tail_defect = 0.0;  ///< |v_{K-1} - v_K| / v_K
    double max_defect = 0.0;   ///< max over 3 <= j <= K-1 of the a_n-recurrence defect
};

/// Checks v_j = a_j - a_{j-1} λ^{-t} with a_n = r(a_{n-1} - a_{n-2}) against a
/// kind-B left eigenvector.
EigvecCheck eigvec_recurrence_check(const SpectralResult& result, double lambda, double t);

/// ψ(t) = (1-λ)^t / (1-λ^t). Throws at t = 0 (pole).
double psi(double lambda, double t);
double psi_prime(double lambda, double t);
double psi_second(double lambda, double t);

/// log ψ(t) when λ^t <= 1/2, log(4 λ^t (1-λ)^t) otherwise.
double pressure_closed(double lambda, double t);

/// -log 2 / log λ
double t0(double lambda);

struct PhaseTransitionReport {
    double lambda = 0.0;
    double t0 = 0.0;
    double left_first = 0.0;
    double right_first = 0.0;
    double left_second = 0.0;
    double right_second = 0.0;
    double expected_first = 0.0;         ///< log(λ(1-λ))
    double expected_right_second = 0.0;  ///< 2 log² λ
};

/// One-sided finite differences (step h, one Richardson level) of
/// pressure_closed at t0.
PhaseTransitionReport phase_transition_report(double lambda, double h = 1e-4);

struct PressureSample {
    double t = 0.0;
    double pressure = 0.0;
    std::vector<double> truncated;  ///< x_{t,K} for each K of the schedule
    bool envelope_ok = true;        ///< log4 + t log(1-λ) >= P >= log4 + t log(λ(1-λ)) (t >= 0)
};

std::vector<PressureSample> pressure_curve(double lambda, std::span<const double> t_grid,
                                           std::span<const std::size_t> k_schedule);

} // namespace lambda_thermo
