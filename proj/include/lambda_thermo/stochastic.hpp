#pragma once

// The induced random walk on states: drift, sampling, ensemble simulation of
// the chain and of the interval map itself, classification, and partition
// functions (including the null-recurrent binomial identities).

#include "lambda_thermo/core_map.hpp"
#include "lambda_thermo/measures.hpp"
#include "lambda_thermo/rational.hpp"
#include "lambda_thermo/rng.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace lambda_thermo {

/// Expected one-step increment of the Lebesgue walk: (2λ-1)/(1-λ).
double drift(double lambda);

/// E[j - i] for the chain whose transitions from W_i are proportional to the
/// (t,p)-conformal masses m(W_j), j >= max(i-1,1). Tail sums in closed form.
double drift_general(State i, double lambda, double t, double p);

/// Two-root closed form of drift_general for p above the pressure, i >= 2:
/// C_i((2r₊-1)/(1-r₊)² + αρ(2r₋-1)/(1-r₋)²), ρ = (r₋/r₊)^{i-1},
/// C_i = (1-r₊)/(1 + αρ(1-r₊)/(1-r₋)).
double drift_two_root(State i, double lambda, double t, double p);

/// Geometric kernel of the λ^t-walk, inverse-CDF sampled from one uniform.
class GeometricKernel {
public:
    GeometricKernel(double lambda, double t);

    double ratio() const noexcept { return ratio_; }

    /// j = max(i-1, 1) + floor(log u / log λ^t), u ∈ (0,1].
    State sample(State i, double u) const;

private:
    double ratio_;
    double inv_log_ratio_;
};

State kernel_sample(State i, double lambda, double t, StreamRng& rng);

inline constexpr State kHistogramCap = 512;

struct WalkConfig {
    double lambda = 0.5;
    double t = 1.0;
    std::int64_t n_steps = 1000;
    std::int64_t n_walkers = 1;
    std::uint64_t seed = 0;
    State escape_threshold = 50;
    /// Starting state; nullopt draws x uniformly from (0,1].
    std::optional<State> initial_state = State{1};
    /// 0 = LAMBDA_THERMO_THREADS / hardware default.
    unsigned threads = 0;
};

void validate(const WalkConfig& config);

struct WalkStats {
    /// counts[k-1] = visits to state k (k <= cap); last entry = overflow.
    std::vector<std::uint64_t> counts;
    std::uint64_t total_visits = 0;
    std::int64_t escaped = 0;
    std::int64_t n_walkers = 0;
    std::int64_t n_steps = 0;
    double mean_displacement = 0.0;  ///< mean of χ_n - χ_0
    double var_displacement = 0.0;   ///< population variance
    std::vector<std::int64_t> return_times;
    State max_state = 0;
    /// Interval simulation only: number of low-bit refreshes performed.
    std::uint64_t precision_refreshes = 0;

    double occupation(State k) const;
    double overflow_fraction() const;
    double escape_fraction() const;
};

/// Ensemble of independent chain trajectories. Walker w draws from
/// StreamRng(seed, w); results are bit-identical for any thread count.
WalkStats simulate_chain(const WalkConfig& config);

/// Same statistics from exact (state, rel) iteration of the map, with t = 1
/// dynamics. When the accumulated expansion has consumed about half of the
/// mantissa of rel, the low half is redrawn from the walker's stream inside
/// the current uncertainty window, standing in for the unresolved digits of
/// a uniformly random starting point.
WalkStats simulate_interval(const WalkConfig& config);

enum class Regime { positive_recurrent, null_recurrent, transient };

std::string_view to_string(Regime r);

struct Classification {
    Regime regime = Regime::positive_recurrent;
    double lambda_t = 0.0;
    std::optional<RhoIntegral> rho;  ///< absent when λ^t > 1/2
    State drift_state = 0;           ///< state at which drift_general was evaluated
    double drift = 0.0;              ///< drift_general at the conformal pressure
    int drift_sign = 0;
};

Classification classify(double lambda, double t, double boundary_tol = 1e-12, State drift_state = 100);

/// Z_k normalised by e^{-kP}: ((e^{-P}B^t)^k)_{e0,e0} with truncation K = k + e0 + 1.
double partition_Z(std::int64_t k, State e0, double lambda, double t);

/// Exact version for rational λ^t; `K` overrides the truncation (>= k+e0+1).
Rational partition_Z_exact(std::int64_t k, State e0, const Rational& lambda_t,
                           std::optional<std::int64_t> K = std::nullopt);

/// 1·M^{k-1}·e_{e0}, the column-sum convention; equals 2·Z_k when M = D, e0 = 1.
Rational partition_column_sum_exact(std::int64_t k, State e0, const Rational& lambda_t);

/// First column of D^k, exact, entries 1..k+2.
std::vector<Rational> null_column(std::int64_t k);

/// Closed form: entry 1 = C(2k,k)/4^k, entry i >= 2 = C(2k-i+1, k-i+1)/4^k.
std::vector<Rational> null_column_closed_form(std::int64_t k);

enum class ClaimReading {
    literal,    ///< p_{k,i} = C(k+2(i-1), 2(i-1)) as printed
    corrected,  ///< p_{k,i} = C(k+i-1, i-1), which reproduces the displayed columns
};

/// The Claim's piecewise formula for the first column of D^k under a reading
/// of p_{k,i}; entries 1..k+2.
std::vector<Rational> null_column_claim(std::int64_t k, ClaimReading reading);

enum class SeriesVerdict { divergent, convergent };

std::string_view to_string(SeriesVerdict v);

struct RecurrenceSeries {
    double lambda_t = 0.0;
    std::int64_t N = 0;
    /// (n, term_n, partial sum through n) at log-spaced n, always including N.
    struct Sample {
        std::int64_t n;
        double term;
        double partial_sum;
    };
    std::vector<Sample> samples;
    double last_term = 0.0;
    double partial_sum = 0.0;
    double fitted_exponent = 0.0;  ///< slope of log term vs log n over [N/10, N]
    SeriesVerdict verdict = SeriesVerdict::divergent;
    bool trimmed = false;       ///< some entries were dropped: sums are lower bounds
    double dropped_mass = 0.0;  ///< total h-weighted mass discarded by trimming
    double retained_mass = 0.0; ///< h-weighted mass still carried at N (1 - dropped, up to rounding)
    std::int64_t support = 0;   ///< length of the column vector at N
};

/// Σ_{n<=N} Z_n e^{-nP} at e0 = 1 by the column recursion v ← M v, carried
/// in the h-weighted form whose entries sum to 1. With trim > 0, trailing
/// weighted entries below `trim` are dropped, which keeps the cost near
/// O(N^{3/2}) at the null point; all terms are nonnegative, so the result is
/// then a lower bound. Verdict: divergent iff the fitted exponent exceeds -1.
RecurrenceSeries recurrence_series(double lambda, double t, std::int64_t N, double trim = 0.0);

} // namespace lambda_thermo
