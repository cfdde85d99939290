#pragma once

// Exact state-space representation of the countably piecewise linear map
//
//     F(x) = (x - λ) / (1 - λ)          on W_1 = (λ, 1]
//     F(x) = (x - λ^n) / (λ(1 - λ))     on W_n = (λ^n, λ^{n-1}],  n >= 2
//
// together with its Markov coding and the geometric potential -t log|F'|.

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace lambda_thermo {

using State = std::int64_t;

class MapParams {
public:
    explicit MapParams(double lambda);

    double lambda() const noexcept { return lambda_; }
    double log_lambda() const noexcept { return log_lambda_; }
    double log_one_minus_lambda() const noexcept { return log1m_lambda_; }

    /// λ^k for k >= 0.
    double lambda_pow(State k) const;

private:
    double lambda_;
    double log_lambda_;
    double log1m_lambda_;
};

/// A point of (0,1] as (n, u): the cell W_n and the relative position
/// u = (x - λ^n) / (λ^{n-1} - λ^n) in (0,1].
struct StatePoint {
    State state = 1;
    double rel = 1.0;

    friend bool operator==(const StatePoint&, const StatePoint&) = default;
};

void validate(const StatePoint& pt);

/// Reconstructs x = λ^{n-1}(λ + u(1-λ)). Underflows for deep states; the
/// dynamics never needs it.
double to_real(const StatePoint& pt, const MapParams& params);

/// Encodes x ∈ (0,1] as (partition_index(x), relative coordinate).
StatePoint from_real(double x, const MapParams& params);

/// The unique n with λ^n < x <= λ^{n-1}. Throws DomainError outside (0,1].
State partition_index(double x, const MapParams& params);

StatePoint step(const StatePoint& pt, const MapParams& params);

class CylinderWord {
public:
    CylinderWord() = default;
    explicit CylinderWord(std::vector<State> symbols);
    CylinderWord(std::initializer_list<State> symbols);

    std::span<const State> symbols() const noexcept { return symbols_; }
    std::size_t size() const noexcept { return symbols_.size(); }
    bool empty() const noexcept { return symbols_.empty(); }
    State front() const { return symbols_.front(); }
    State back() const { return symbols_.back(); }
    State operator[](std::size_t k) const { return symbols_[k]; }

    /// Symbols >= 1 and e_{k+1} >= e_k - 1 throughout.
    bool admissible() const noexcept;

    /// Throws InadmissibleWord unless admissible() and non-empty.
    void require_admissible() const;

    CylinderWord extended(State next) const;

    friend bool operator==(const CylinderWord&, const CylinderWord&) = default;

private:
    std::vector<State> symbols_;
};

/// States visited by pt, F(pt), ..., F^{n-1}(pt).
CylinderWord itinerary(StatePoint pt, std::size_t n, const MapParams& params);

/// log|F'| on W_state: log 1/(1-λ) on W_1, log 1/(λ(1-λ)) elsewhere.
double log_abs_deriv(State state, const MapParams& params);

struct PotentialParams {
    double t = 1.0;
    double p = 0.0;
};

/// S_n Φ_t = -t Σ_k log|F'|(e_k); constant on the cylinder.
double ergodic_sum_phi(const CylinderWord& word, const PotentialParams& potential,
                       const MapParams& params);

/// log |[e_0 ... e_{n-1}]|.
double log_cylinder_length(const CylinderWord& word, const MapParams& params);

double cylinder_length(const CylinderWord& word, const MapParams& params);

} // namespace lambda_thermo
