#pragma once

// Conformal and invariant measures on the states W_k, with closed-form tail
// laws, densities, eigenfunctions and the variational identity.

#include "lambda_thermo/core_map.hpp"

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace lambda_thermo {

/// mass(k) = C γ^k
struct GeometricLaw {
    double C = 1.0;
    double gamma = 0.5;
};

/// mass(k) = (A + B k) γ^k
struct PolyGeometricLaw {
    double A = 0.0;
    double B = 0.0;
    double gamma = 0.5;
};

/// mass(k) = A₊ r₊^k + A₋ r₋^k
struct TwoTermLaw {
    double A_plus = 0.0;
    double r_plus = 0.5;
    double A_minus = 0.0;
    double r_minus = 0.5;
};

using TailLaw = std::variant<GeometricLaw, PolyGeometricLaw, TwoTermLaw>;

std::string law_name(const TailLaw& law);

/// A measure on {W_k : k >= 1} given by an analytic tail law, optionally with
/// finitely many masses rescaled (used to probe residual sensitivity).
class StateMeasure {
public:
    explicit StateMeasure(TailLaw law);

    const TailLaw& law() const noexcept { return law_; }

    double mass(State k) const;
    /// Σ_{j >= k} mass(j)
    double tail_sum(State k) const;
    /// Σ_{j >= k} j · mass(j)
    double tail_first_moment(State k) const;
    double total() const { return tail_sum(1); }

    /// tail_first_moment(k) / tail_sum(k), evaluated with γ^k cancelled so
    /// it stays finite where the tails themselves underflow.
    double tail_mean(State k) const;

    /// Σ mass = 1 to 1e-12.
    bool normalized() const;

    /// mass(k) > 0 for every k >= 1, decided from the law's sign structure.
    bool positive() const;

    /// Copy with mass(k) multiplied by `factor`.
    StateMeasure perturbed(State k, double factor) const;

    std::vector<double> masses(State k_max) const;

private:
    double law_mass(State k) const;
    double law_tail(State k, int moment) const;

    TailLaw law_;
    std::vector<std::pair<State, double>> adjustments_;
};

struct ConformalSolution {
    double c = 0.0;
    double r_plus = 0.5;
    double r_minus = 0.5;
    double A_plus = 0.0;
    double A_minus = 0.0;
};

/// Identical to pressure_closed.
double conformal_pressure(double lambda, double t);

/// c, r_± and A_± for p strictly above the conformal pressure.
ConformalSolution conformal_solution(double lambda, double t, double p);

/// (t,p)-conformal measure, normalised to total mass 1. At p = P_Conf the
/// law is geometric (λ^t < 1/2) or poly-geometric (λ^t >= 1/2); above it the
/// two-term law. |λ^t - 1/2| < boundary_tol selects the double-root law
/// 2^{-k}. Throws DomainError for p below P_Conf.
StateMeasure conformal_measure(double lambda, double t, double p, double boundary_tol = 1e-12);

/// max over k <= k_max of the relative defects of
///   m(W_1) = e^{-p}(1-λ)^t Σ_{j>=1} m(W_j)
///   m(W_k) = e^{-p}(λ(1-λ))^t Σ_{j>=k-1} m(W_j),  k >= 2.
double conformal_residual(const StateMeasure& m, double lambda, double t, double p, State k_max);

/// μ_t(W_i) = (1-2λ^t)/λ^t · (λ^t/(1-λ^t))^i. Requires λ^t < 1/2.
StateMeasure invariant_measure(double lambda, double t);

/// invariant_measure(λ, 1). Requires λ < 1/2.
StateMeasure acip(double lambda);

/// Transition probability W_i → W_j of the chain driven by the conformal
/// measure at P_Conf (λ^t < 1/2): (1-λ^t) λ^{t(j - max(i-1,1))}, j >= max(i-1,1).
double conformal_transition(State i, State j, double lambda, double t);

/// max_j |(vP)_j - v_j| / v_j over j <= j_max for the invariant vector.
double stationarity_residual(double lambda, double t, State j_max);

/// dμ_t/dm_t on W_n: (1-2λ^t)/(1-λ^t)^{n+1}.
double density_ratio(State n, double lambda, double t);

/// m_t([w]) for the conformal measure at p = log ψ(t), λ^t < 1/2:
/// exp(-np + S_nΦ_t) · λ^{t·max(e_{n-1}-2, 0)}.
double cylinder_conformal_mass(const CylinderWord& word, double lambda, double t);
double log_cylinder_conformal_mass(const CylinderWord& word, double lambda, double t);

/// μ_t([w]) / exp(-np + S_nΦ_t) = density_ratio(e_0) · λ^{t·max(e_{n-1}-2, 0)}.
double gibbs_ratio(const CylinderWord& word, double lambda, double t);

/// μ_t([w]) from the stationary Markov chain: v_{e_0} Π P(e_k, e_{k+1}).
double markov_cylinder_mass(const CylinderWord& word, double lambda, double t);

/// h_j = (1-λ^t)^{-(j-1)} for j = 1..j_max. Requires λ^t <= 1/2.
std::vector<double> eigenfunction(double lambda, double t, State j_max);

/// max_i |Σ_{j<=i+1} e^{Φ_t(j)} h_j - ψ(t) h_i| / (ψ(t) h_i) over i <= i_max.
double eigenfunction_residual(double lambda, double t, State i_max);

struct RhoIntegral {
    double value = 0.0;
    bool divergent = false;
};

/// Σ_i (λ^t/(1-λ^t))^{i-1} = (1-λ^t)/(1-2λ^t); divergent at λ^t = 1/2.
RhoIntegral rho_integral(double lambda, double t, double boundary_tol = 1e-12);

struct VariationalValue {
    double entropy = 0.0;
    double integral = 0.0;
    double sum = 0.0;
    double log_psi = 0.0;
};

/// h(μ_t) + ∫Φ_t dμ_t for the stationary chain. Requires λ^t < 1/2.
VariationalValue variational_value(double lambda, double t);

} // namespace lambda_thermo
