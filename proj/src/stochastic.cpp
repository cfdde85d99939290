#include "lambda_thermo/stochastic.hpp"

#include "lambda_thermo/error.hpp"
#include "lambda_thermo/parallel.hpp"
#include "lambda_thermo/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lambda_thermo {

namespace {

void require_lambda(double lambda, const char* who)
{
    if (!(lambda > 0.0 && lambda < 1.0))
        throw DomainError(std::string(who) + ": lambda must lie in (0,1)");
}

State lower_target(State i) { return std::max<State>(i - 1, 1); }

} // namespace

double drift(double lambda)
{
    require_lambda(lambda, "drift");
    return (2.0 * lambda - 1.0) / (1.0 - lambda);
}

double drift_general(State i, double lambda, double t, double p)
{
    if (i < 1) throw DomainError("drift_general: state must be >= 1");
    const StateMeasure m = conformal_measure(lambda, t, p);
    const State lo = lower_target(i);
    return m.tail_mean(lo) - static_cast<double>(i);
}

double drift_two_root(State i, double lambda, double t, double p)
{
    if (i < 2) throw DomainError("drift_two_root: state must be >= 2");
    const ConformalSolution s = conformal_solution(lambda, t, p);
    const double rp = s.r_plus;
    const double rm = s.r_minus;
    const double alpha = s.A_minus / s.A_plus;
    const double rho = std::pow(rm / rp, static_cast<double>(i - 1));
    const double C = (1.0 - rp) / (1.0 + alpha * rho * (1.0 - rp) / (1.0 - rm));
    return C * ((2.0 * rp - 1.0) / ((1.0 - rp) * (1.0 - rp))
                + alpha * rho * (2.0 * rm - 1.0) / ((1.0 - rm) * (1.0 - rm)));
}

GeometricKernel::GeometricKernel(double lambda, double t)
{
    require_lambda(lambda, "GeometricKernel");
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("GeometricKernel: t must be positive");
    ratio_ = std::pow(lambda, t);
    if (!(ratio_ > 0.0 && ratio_ < 1.0)) throw DomainError("GeometricKernel: lambda^t must lie in (0,1)");
    inv_log_ratio_ = 1.0 / std::log(ratio_);
}

State GeometricKernel::sample(State i, double u) const
{
    // P(G >= g) = P(u <= ratio^g); u = 1 gives G = 0.
    const double g = std::floor(std::log(u) * inv_log_ratio_);
    constexpr double cap = 1e15;
    return lower_target(i) + static_cast<State>(std::min(g, cap));
}

State kernel_sample(State i, double lambda, double t, StreamRng& rng)
{
    if (i < 1) throw DomainError("kernel_sample: state must be >= 1");
    return GeometricKernel(lambda, t).sample(i, rng.uniform());
}

void validate(const WalkConfig& c)
{
    require_lambda(c.lambda, "WalkConfig");
    if (!(c.t > 0.0) || !std::isfinite(c.t)) throw DomainError("WalkConfig: t must be positive");
    if (c.n_steps < 1) throw DomainError("WalkConfig: n_steps must be >= 1");
    if (c.n_walkers < 1) throw DomainError("WalkConfig: n_walkers must be >= 1");
    if (c.escape_threshold < 2) throw DomainError("WalkConfig: escape_threshold must be >= 2");
    if (c.initial_state && *c.initial_state < 1) throw DomainError("WalkConfig: initial_state must be >= 1");
}

double WalkStats::occupation(State k) const
{
    if (k < 1 || k > kHistogramCap || total_visits == 0) return 0.0;
    return static_cast<double>(counts[static_cast<std::size_t>(k - 1)]) / static_cast<double>(total_visits);
}

double WalkStats::overflow_fraction() const
{
    if (total_visits == 0) return 0.0;
    return static_cast<double>(counts.back()) / static_cast<double>(total_visits);
}

double WalkStats::escape_fraction() const
{
    return n_walkers == 0 ? 0.0 : static_cast<double>(escaped) / static_cast<double>(n_walkers);
}

namespace {

constexpr std::int64_t kChunkWalkers = 64;
constexpr std::size_t kReturnSamplesPerWalker = 64;

struct Partial {
    std::vector<std::uint64_t> counts = std::vector<std::uint64_t>(kHistogramCap + 1, 0);
    std::vector<std::int64_t> displacement;
    std::vector<std::int64_t> return_times;
    std::int64_t escaped = 0;
    State max_state = 0;
    std::uint64_t refreshes = 0;
};

/// Per-walker bookkeeping shared by both simulators.
class Tracker {
public:
    Tracker(Partial& out, State start, State threshold)
        : out_(out), start_(start), threshold_(threshold), state_(start)
    {
        note_max(start);
        if (start == 1) last_visit_ = 0;
        escaped_ = start > threshold_;
    }

    void visit(State s, std::int64_t time)
    {
        state_ = s;
        ++out_.counts[static_cast<std::size_t>(std::min<State>(s, kHistogramCap + 1) - 1)];
        note_max(s);
        if (s > threshold_) escaped_ = true;
        else if (2 * s < threshold_) escaped_ = false;
        if (s == 1) {
            if (last_visit_ >= 0 && returns_ < kReturnSamplesPerWalker) {
                out_.return_times.push_back(time - last_visit_);
                ++returns_;
            }
            last_visit_ = time;
        }
    }

    void finish()
    {
        out_.displacement.push_back(state_ - start_);
        if (escaped_) ++out_.escaped;
    }

private:
    void note_max(State s) { out_.max_state = std::max(out_.max_state, s); }

    Partial& out_;
    State start_;
    State threshold_;
    State state_;
    bool escaped_ = false;
    std::int64_t last_visit_ = -1;
    std::size_t returns_ = 0;
};

template <class RunWalker>
WalkStats run_ensemble(const WalkConfig& config, RunWalker&& run_walker)
{
    const std::int64_t n_chunks = (config.n_walkers + kChunkWalkers - 1) / kChunkWalkers;
    std::vector<Partial> parts(static_cast<std::size_t>(n_chunks));
    parallel_for(
        static_cast<std::size_t>(n_chunks),
        [&](std::size_t c) {
            Partial& part = parts[c];
            const std::int64_t first = static_cast<std::int64_t>(c) * kChunkWalkers;
            const std::int64_t last = std::min(first + kChunkWalkers, config.n_walkers);
            for (std::int64_t w = first; w < last; ++w) run_walker(static_cast<std::uint64_t>(w), part);
        },
        config.threads);

    WalkStats stats;
    stats.counts.assign(kHistogramCap + 1, 0);
    stats.n_walkers = config.n_walkers;
    stats.n_steps = config.n_steps;
    std::vector<std::int64_t> displacement;
    displacement.reserve(static_cast<std::size_t>(config.n_walkers));
    for (const Partial& part : parts) {
        for (std::size_t k = 0; k < part.counts.size(); ++k) stats.counts[k] += part.counts[k];
        displacement.insert(displacement.end(), part.displacement.begin(), part.displacement.end());
        stats.return_times.insert(stats.return_times.end(), part.return_times.begin(), part.return_times.end());
        stats.escaped += part.escaped;
        stats.max_state = std::max(stats.max_state, part.max_state);
        stats.precision_refreshes += part.refreshes;
    }
    for (std::uint64_t c : stats.counts) stats.total_visits += c;

    double mean = 0.0;
    for (std::int64_t d : displacement) mean += static_cast<double>(d);
    mean /= static_cast<double>(displacement.size());
    double var = 0.0;
    for (std::int64_t d : displacement) {
        const double e = static_cast<double>(d) - mean;
        var += e * e;
    }
    stats.mean_displacement = mean;
    stats.var_displacement = var / static_cast<double>(displacement.size());
    return stats;
}

} // namespace

WalkStats simulate_chain(const WalkConfig& config)
{
    validate(config);
    const GeometricKernel kernel(config.lambda, config.t);
    const MapParams params(config.lambda);
    return run_ensemble(config, [&](std::uint64_t w, Partial& part) {
        StreamRng rng(config.seed, w);
        State s = config.initial_state ? *config.initial_state : partition_index(rng.uniform(), params);
        Tracker tracker(part, s, config.escape_threshold);
        for (std::int64_t n = 1; n <= config.n_steps; ++n) {
            s = kernel.sample(s, rng.uniform());
            tracker.visit(s, n);
        }
        tracker.finish();
    });
}

WalkStats simulate_interval(const WalkConfig& config)
{
    validate(config);
    if (config.t != 1.0) throw DomainError("simulate_interval: the map's own dynamics corresponds to t = 1");
    const MapParams params(config.lambda);
    const double log_lambda = params.log_lambda();
    const double log_gap = params.log_one_minus_lambda();
    constexpr double fresh_width = 0x1p-53;
    constexpr double refresh_at = 0x1p-26;

    return run_ensemble(config, [&](std::uint64_t w, Partial& part) {
        StreamRng rng(config.seed, w);
        StatePoint pt = config.initial_state ? StatePoint{*config.initial_state, rng.uniform()}
                                             : from_real(rng.uniform(), params);
        Tracker tracker(part, pt.state, config.escape_threshold);
        // log of the absolute uncertainty carried by rel
        double log_width = std::log(fresh_width);
        for (std::int64_t n = 1; n <= config.n_steps; ++n) {
            const State m = partition_index(pt.rel, params);
            log_width -= static_cast<double>(m - 1) * log_lambda + log_gap;
            pt = step(pt, params);
            if (log_width > std::log(refresh_at)) {
                const double width = std::exp(log_width);
                double rel = pt.rel + (2.0 * rng.uniform() - 1.0) * std::min(width, 1.0);
                if (rel > 1.0) rel = 2.0 - rel;
                if (!(rel > 0.0)) rel = -rel;
                if (!(rel > 0.0)) rel = std::numeric_limits<double>::min();
                pt.rel = rel;
                log_width = std::log(fresh_width);
                ++part.refreshes;
            }
            tracker.visit(pt.state, n);
        }
        tracker.finish();
    });
}

std::string_view to_string(Regime r)
{
    switch (r) {
    case Regime::positive_recurrent: return "positive_recurrent";
    case Regime::null_recurrent: return "null_recurrent";
    case Regime::transient: return "transient";
    }
    return "unknown";
}

Classification classify(double lambda, double t, double boundary_tol, State drift_state)
{
    require_lambda(lambda, "classify");
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("classify: t must be positive");
    Classification c;
    c.lambda_t = std::pow(lambda, t);
    if (std::abs(c.lambda_t - 0.5) < boundary_tol) c.regime = Regime::null_recurrent;
    else if (c.lambda_t < 0.5) c.regime = Regime::positive_recurrent;
    else c.regime = Regime::transient;

    if (c.regime != Regime::transient) c.rho = rho_integral(lambda, t, boundary_tol);
    c.drift_state = drift_state;
    c.drift = drift_general(drift_state, lambda, t, pressure_closed(lambda, t));
    c.drift_sign = c.drift > 1e-12 ? 1 : (c.drift < -1e-12 ? -1 : 0);
    return c;
}

namespace {

/// Row weights (first, rest) of e^{-P} B^t, in terms of a = λ^t.
template <class T>
std::pair<T, T> scaled_weights(const T& a)
{
    if (a <= T(1) / 2) return {T(1) - a, a * (T(1) - a)};
    return {T(1) / (4 * a), T(1) / 4};
}

/// u ← uᵀM in place (prefix sums; M has unit ratio).
template <class T>
void left_step(std::vector<T>& u, const T& w1, const T& w)
{
    // (uM)_j = u_1 w1 + Σ_{2<=i<=j+1} u_i w
    const std::size_t K = u.size();
    T acc = u[0] * w1;
    T next = K > 1 ? u[1] * w : T(0);
    for (std::size_t j = 0; j < K; ++j) {
        acc += next;
        next = j + 2 < K ? u[j + 2] * w : T(0);
        u[j] = acc;
    }
}

/// v ← M v in place, growing the support by one entry.
template <class T>
void right_step_grow(std::vector<T>& v, const T& w1, const T& w)
{
    const std::size_t L = v.size();
    v.push_back(T(0));
    T suffix(0);
    for (std::size_t i = L; i >= 1; --i) {
        suffix += v[i - 1];
        v[i] = w * suffix;
    }
    v[0] = w1 * suffix;
}

std::size_t truncation(std::int64_t k, State e0)
{
    if (k < 1) throw DomainError("partition_Z: k must be >= 1");
    if (e0 < 1) throw DomainError("partition_Z: e0 must be >= 1");
    return static_cast<std::size_t>(k + e0 + 1);
}

template <class T>
T loop_mass(std::int64_t k, State e0, const T& a, std::size_t K)
{
    const auto [w1, w] = scaled_weights(a);
    std::vector<T> u(K, T(0));
    u[static_cast<std::size_t>(e0 - 1)] = T(1);
    for (std::int64_t n = 0; n < k; ++n) left_step(u, w1, w);
    return u[static_cast<std::size_t>(e0 - 1)];
}

Rational require_ratio(const Rational& a)
{
    if (!(a > 0 && a < 1)) throw DomainError("lambda^t must lie in (0,1)");
    return a;
}

} // namespace

double partition_Z(std::int64_t k, State e0, double lambda, double t)
{
    require_lambda(lambda, "partition_Z");
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("partition_Z: t must be nonnegative");
    const double a = std::pow(lambda, t);
    if (!(a < 1.0)) throw DomainError("partition_Z: lambda^t must be below 1");
    return loop_mass(k, e0, a, truncation(k, e0));
}

Rational partition_Z_exact(std::int64_t k, State e0, const Rational& lambda_t, std::optional<std::int64_t> K)
{
    const std::size_t minimal = truncation(k, e0);
    std::size_t size = minimal;
    if (K) {
        if (*K < static_cast<std::int64_t>(minimal))
            throw DomainError("partition_Z_exact: K must be >= k + e0 + 1");
        size = static_cast<std::size_t>(*K);
    }
    return loop_mass(k, e0, require_ratio(lambda_t), size);
}

Rational partition_column_sum_exact(std::int64_t k, State e0, const Rational& lambda_t)
{
    truncation(k, e0);
    const auto [w1, w] = scaled_weights(require_ratio(lambda_t));
    std::vector<Rational> v(static_cast<std::size_t>(e0), Rational(0));
    v.back() = 1;
    for (std::int64_t n = 1; n < k; ++n) right_step_grow(v, w1, w);
    Rational sum = 0;
    for (const Rational& x : v) sum += x;
    return sum;
}

std::vector<Rational> null_column(std::int64_t k)
{
    if (k < 1) throw DomainError("null_column: k must be >= 1");
    const Rational w1(1, 2), w(1, 4);
    std::vector<Rational> v{Rational(1)};
    for (std::int64_t n = 0; n < k; ++n) right_step_grow(v, w1, w);
    v.resize(static_cast<std::size_t>(k + 2), Rational(0));
    return v;
}

std::vector<Rational> null_column_closed_form(std::int64_t k)
{
    if (k < 1) throw DomainError("null_column_closed_form: k must be >= 1");
    const auto uk = static_cast<unsigned>(k);
    const Rational scale = pow(Rational(1, 4), uk);
    std::vector<Rational> v(uk + 2, Rational(0));
    v[0] = Rational(binomial(2 * uk, uk)) * scale;
    for (unsigned i = 2; i <= uk + 1; ++i) v[i - 1] = Rational(binomial(2 * uk - i + 1, uk - i + 1)) * scale;
    return v;
}

std::vector<Rational> null_column_claim(std::int64_t k, ClaimReading reading)
{
    if (k < 1) throw DomainError("null_column_claim: k must be >= 1");
    const auto uk = static_cast<unsigned>(k);
    auto p = [&](unsigned i) -> Rational {
        return reading == ClaimReading::literal ? Rational(binomial(uk + 2 * (i - 1), 2 * (i - 1)))
                                                : Rational(binomial(uk + i - 1, i - 1));
    };
    std::vector<Rational> v(uk + 2, Rational(0));
    v[0] = p(uk) * pow(Rational(1, 2), 2 * uk - 1);
    for (unsigned i = 2; i <= uk + 1; ++i) v[i - 1] = p(uk - i + 2) * pow(Rational(1, 2), 2 * uk);
    return v;
}

std::string_view to_string(SeriesVerdict v)
{
    return v == SeriesVerdict::divergent ? "divergent" : "convergent";
}

RecurrenceSeries recurrence_series(double lambda, double t, std::int64_t N, double trim)
{
    require_lambda(lambda, "recurrence_series");
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("recurrence_series: t must be nonnegative");
    if (N < 10) throw DomainError("recurrence_series: N must be >= 10");
    if (!(trim >= 0.0 && trim < 1.0)) throw DomainError("recurrence_series: trim must lie in [0,1)");

    RecurrenceSeries out;
    out.lambda_t = std::pow(lambda, t);
    out.N = N;
    if (!(out.lambda_t < 1.0)) throw DomainError("recurrence_series: lambda^t must be below 1");
    const auto [w1, w] = scaled_weights(out.lambda_t);

    // Work with y_j = h_j v_j, h the positive left fixed vector of M (h_1 = 1),
    // so Σ y_j = 1 throughout and deep entries never underflow. Only the
    // ratios ρ_j = h_{j+1}/h_j are needed: ρ_1 = (1-w1)/w, ρ_j = (1 - 1/ρ_{j-1})/w.
    std::vector<double> rho{(1.0 - w1) / w};
    std::vector<double> inv_rho{1.0 / rho[0]};
    std::vector<double> w_rho{w * rho[0]};
    std::vector<double> inv_pair{0.0};  // inv_rho[k] · inv_rho[k+1]
    std::vector<double> y{1.0};
    double sum = 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::int64_t fit_count = 0;
    const std::int64_t fit_from = std::max<std::int64_t>(N / 10, 1);
    double next_sample = 1.0;
    constexpr double sample_ratio = 1.122018454301963;  // 10^{1/20}

    for (std::int64_t n = 1; n <= N; ++n) {
        const std::size_t L = y.size();
        while (rho.size() < L + 1) {
            rho.push_back((1.0 - 1.0 / rho.back()) / w);
            inv_rho.push_back(1.0 / rho.back());
            w_rho.push_back(w * rho.back());
            inv_pair.back() = inv_rho[inv_rho.size() - 2] * inv_rho.back();
            inv_pair.push_back(0.0);
        }
        y.push_back(0.0);
        // T_k = Σ_{j>=k} y_j h_k/h_j (0-based), then y'_{k+1} = w ρ_k T_k.
        // Two entries per pass halve the serial dependency chain.
        double T = 0.0;
        std::size_t k = L;
        for (; k >= 2; k -= 2) {
            const double ya = y[k - 1], yb = y[k - 2];
            const double Ta = ya + inv_rho[k - 1] * T;
            const double Tb = (yb + inv_rho[k - 2] * ya) + inv_pair[k - 2] * T;
            y[k] = w_rho[k - 1] * Ta;
            y[k - 1] = w_rho[k - 2] * Tb;
            T = Tb;
        }
        if (k == 1) {
            T = y[0] + inv_rho[0] * T;
            y[1] = w_rho[0] * T;
        }
        y[0] = w1 * T;
        const double term = y[0];
        sum += term;
        if (trim > 0.0) {
            while (y.size() > 1 && y.back() < trim) {
                out.dropped_mass += y.back();
                y.pop_back();
            }
        }
        if (n >= fit_from && term > 0.0) {
            const double x = std::log(static_cast<double>(n));
            const double ly = std::log(term);
            sx += x;
            sy += ly;
            sxx += x * x;
            sxy += x * ly;
            ++fit_count;
        }
        if (static_cast<double>(n) >= next_sample || n == N) {
            out.samples.push_back({n, term, sum});
            while (next_sample <= static_cast<double>(n)) next_sample *= sample_ratio;
        }
    }
    out.trimmed = out.dropped_mass > 0.0;
    out.last_term = y[0];
    out.partial_sum = sum;
    out.support = static_cast<std::int64_t>(y.size());
    for (double v : y) out.retained_mass += v;
    const double nf = static_cast<double>(fit_count);
    out.fitted_exponent = (nf * sxy - sx * sy) / (nf * sxx - sx * sx);
    out.verdict = out.fitted_exponent > -1.0 ? SeriesVerdict::divergent : SeriesVerdict::convergent;
    return out;
}

} // namespace lambda_thermo
