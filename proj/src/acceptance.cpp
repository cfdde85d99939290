#include "lambda_thermo/acceptance.hpp"

#include "lambda_thermo/dimension.hpp"
#include "lambda_thermo/error.hpp"
#include "lambda_thermo/measures.hpp"
#include "lambda_thermo/rational.hpp"
#include "lambda_thermo/spectra.hpp"
#include "lambda_thermo/stochastic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

namespace lambda_thermo {

namespace {

std::string g(double x, int digits = 4)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

struct Builder {
    std::ostringstream detail;
    bool ok = true;

    void require(bool cond, const std::string& what)
    {
        if (!cond) {
            ok = false;
            detail << "FAILED: " << what << "; ";
        }
    }
    void note(const std::string& s) { detail << s << "; "; }

    std::string text() const
    {
        std::string s = detail.str();
        if (s.size() >= 2) s.resize(s.size() - 2);
        return s;
    }
};

// 1. x_{t,K} increases in K and approaches ψ(t) (t = 1) or 4 (t = 0). Once
// the gap to the limit is below rounding (1 - x_K ~ (3/7)^K at t = 1) strict
// increase is no longer observable in double precision; from there on x_K
// must sit within a few ulps of the limit and never drop by more than 4ε.
void pressure_vs_truncation(Builder& b)
{
    const double lambda = 0.3;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    for (double t : {1.0, 0.0}) {
        const double target = t == 1.0 ? psi(lambda, 1.0) : 4.0;
        const double tol = t == 1.0 ? 1e-3 : 1e-2;
        double prev = 0.0, last = 0.0;
        bool monotone = true;
        std::size_t resolved_to = 0;
        for (std::size_t K = 2; K <= 2048; K *= 2) {
            last = leading_eigen(build(OperatorKind::B, K, lambda, t)).value;
            if (target - last > 1e-13 * target) {
                monotone = monotone && last > prev && last < target;
                resolved_to = K;
            } else {
                monotone = monotone && last >= prev - 4 * eps * target && std::abs(last - target) <= 8 * eps * target;
            }
            prev = last;
        }
        const std::string tag = "t=" + g(t, 2);
        b.require(monotone, tag + " x_K not increasing toward the limit");
        b.require(std::abs(last - target) < tol, tag + " |x_2048 - limit| >= " + g(tol));
        b.note(tag + ": increasing from below through K=" + std::to_string(resolved_to) +
               (resolved_to < 2048 ? " (then at the limit to rounding)" : "") + ", |x_2048 - " + g(target, 6) +
               "| = " + g(std::abs(last - target), 3));
    }
}

// 2. s_{t,2..4} against the surds, for the matrix divided by (1-λ)^t.
void finite_k_eigenvalues(Builder& b)
{
    double worst = 0.0;
    int points = 0;
    for (double lambda : {0.15, 0.3, 0.5, 0.7, 0.85}) {
        for (double t : {0.25, 0.8, 1.5, 3.0}) {
            const double a = std::pow(lambda, t), c = std::pow(1.0 - lambda, t);
            const double surd[3] = {a + 1.0, (2 * a + 1 + std::sqrt(4 * a * a + 1)) / 2,
                                    (3 * a + 1 + std::sqrt(5 * a * a - 2 * a + 1)) / 2};
            for (std::size_t K = 2; K <= 4; ++K) {
                const double s = power_iteration(build(OperatorKind::B, K, lambda, t), 1e-14).value / c;
                worst = std::max(worst, std::abs(s - surd[K - 2]));
            }
            ++points;
        }
    }
    b.require(worst < 1e-10, "max deviation >= 1e-10");
    b.note(std::to_string(points) + " (λ,t) points, max |s_{t,K} - surd| = " + g(worst, 3));
}

// 3. Exact char-poly identity of A and B.
void char_poly_identity(Builder& b)
{
    int checked = 0;
    for (const Rational& a : {Rational(1, 3), Rational(2, 5), Rational(1, 2), Rational(3, 5)}) {
        for (std::size_t K = 1; K <= 10; ++K) {
            const bool eq = char_poly_equal_AB(K, a, 10);
            b.require(eq, "K=" + std::to_string(K) + " λ^t=" + to_string(a));
            ++checked;
        }
    }
    b.note(std::to_string(checked) + " exact (K, λ^t) comparisons");
}

// 4. Functional-equation residuals of the closed-form conformal measures.
void conformal_residuals(Builder& b)
{
    double worst = 0.0;
    int triples = 0, two_term = 0;
    for (auto [lambda, t] : {std::pair{0.2, 1.0}, {0.3, 2.0}, {0.45, 1.0}, {0.6, 1.0}, {0.8, 0.5}}) {
        const double P = pressure_closed(lambda, t);
        for (double dp : {0.0, 0.01, 0.3, 1.0}) {
            const double p = P + dp;
            const StateMeasure m = conformal_measure(lambda, t, p);
            b.require(m.normalized() && m.positive(), "measure not a positive probability at λ=" + g(lambda) +
                                                           " t=" + g(t) + " p=P+" + g(dp));
            worst = std::max(worst, conformal_residual(m, lambda, t, p, 100));
            ++triples;
            if (std::holds_alternative<TwoTermLaw>(m.law())) ++two_term;
        }
    }
    b.require(worst < 1e-12, "max residual >= 1e-12");
    b.note(std::to_string(triples) + " triples (" + std::to_string(two_term) + " two-term), max residual " +
           g(worst, 3));
}

// 5. Variational identity, analytically and against brute truncated entropy.
void variational_identity(Builder& b)
{
    double worst = 0.0;
    int points = 0;
    for (double lambda = 0.05; lambda < 1.0; lambda += 0.1) {
        for (double t = 0.2; t <= 5.0; t += 0.4) {
            if (!(std::pow(lambda, t) < 0.5)) continue;
            const VariationalValue v = variational_value(lambda, t);
            worst = std::max(worst, std::abs(v.sum - std::log(psi(lambda, t))));
            ++points;
        }
    }
    b.require(worst < 1e-12, "analytic identity off by >= 1e-12");

    double worst_brute = 0.0;
    for (auto [lambda, t] : {std::pair{1.0 / 3.0, 1.0}, {0.2, 1.0}, {0.6, 2.0}, {0.9, 8.0}}) {
        const StateMeasure mu = invariant_measure(lambda, t);
        double H = 0.0;
        for (State i = 1; i <= 200; ++i) {
            double row = 0.0;
            for (State j = std::max<State>(i - 1, 1); j <= i + 200; ++j) {
                const double P = conformal_transition(i, j, lambda, t);
                if (P > 0.0) row -= P * std::log(P);
            }
            H += mu.mass(i) * row;
        }
        worst_brute = std::max(worst_brute, std::abs(variational_value(lambda, t).entropy - H));
    }
    b.require(worst_brute < 1e-10, "entropy differs from K=200 truncation by >= 1e-10");
    b.note(std::to_string(points) + " grid points, max |h+∫Φ - log ψ| = " + g(worst, 3) +
           "; K=200 entropy oracle max gap " + g(worst_brute, 3));
}

// 6. One-sided derivatives of the pressure at t0.
void phase_transition(Builder& b)
{
    for (double lambda : {0.3, 0.6}) {
        const PhaseTransitionReport r = phase_transition_report(lambda);
        const double first = std::log(lambda * (1.0 - lambda));
        const double second = 2.0 * std::log(lambda) * std::log(lambda);
        const double e1 = std::max(std::abs(r.left_first - first), std::abs(r.right_first - first));
        const double e2l = std::abs(r.left_second);
        const double e2r = std::abs(r.right_second - second);
        const std::string tag = "λ=" + g(lambda, 2);
        b.require(e1 < 1e-6, tag + " first derivatives");
        b.require(e2l < 1e-4, tag + " left second derivative");
        b.require(e2r < 1e-4, tag + " right second derivative");
        b.note(tag + ": D1 err " + g(e1, 2) + ", D2- err " + g(e2l, 2) + ", D2+ err " + g(e2r, 2));
    }
}

// 7. Escape and occupation by simulation, deterministic under a fixed seed.
void simulation(Builder& b)
{
    WalkConfig esc;
    esc.lambda = 0.6;
    esc.n_steps = 10'000;
    esc.n_walkers = 10'000;
    esc.seed = 20240601;
    esc.escape_threshold = 50;
    const WalkStats s6 = simulate_chain(esc);
    b.require(s6.escape_fraction() >= 0.99, "λ=0.6 escape fraction < 0.99");

    WalkConfig occ;
    occ.lambda = 0.4;
    occ.n_steps = 10'000;
    occ.n_walkers = 100;
    occ.seed = 20240602;
    occ.threads = 1;
    const WalkStats s4 = simulate_chain(occ);
    const double f1 = s4.occupation(1);
    b.require(s4.total_visits == 1'000'000u, "λ=0.4 run is not 10^6 steps");
    b.require(std::abs(f1 - 1.0 / 3.0) < 0.01, "λ=0.4 occupation of W_1 off by >= 0.01");

    occ.threads = 4;
    const WalkStats again = simulate_chain(occ);
    const bool same = again.counts == s4.counts && again.return_times == s4.return_times &&
                      again.mean_displacement == s4.mean_displacement && again.escaped == s4.escaped;
    b.require(same, "results depend on thread count");
    b.note("λ=0.6 escape " + g(s6.escape_fraction(), 5) + "; λ=0.4 occupation(W_1) " + g(f1, 5) +
           " (target 1/3); 1 vs 4 threads identical: " + (same ? "yes" : "no"));
}

// 8. Null-recurrent partition functions.
void null_partition(Builder& b)
{
    bool binomial_ok = true;
    for (unsigned k = 1; k <= 30; ++k) {
        const Rational expected = Rational(binomial(2 * k, k)) * pow(Rational(1, 4), k);
        binomial_ok = binomial_ok && null_column(k)[0] == expected &&
                      partition_Z_exact(k, 1, Rational(1, 2)) == expected;
    }
    b.require(binomial_ok, "(D^k)_{1,1} != C(2k,k)/4^k for some k <= 30");

    using R = Rational;
    const std::vector<std::vector<R>> shown = {
        {R(1, 2), R(1, 4)},
        {R(3, 8), R(3, 16), R(1, 16)},
        {R(10, 32), R(10, 64), R(4, 64), R(1, 64)},
        {R(35, 128), R(35, 256), R(15, 256), R(5, 256), R(1, 256)},
        {R(126, 512), R(126, 1024), R(56, 1024), R(21, 1024), R(6, 1024), R(1, 1024)},
    };
    bool columns_ok = true;
    for (std::size_t k = 1; k <= shown.size(); ++k) {
        const auto col = null_column(static_cast<std::int64_t>(k));
        for (std::size_t i = 0; i < col.size(); ++i)
            columns_ok = columns_ok && col[i] == (i < shown[k - 1].size() ? shown[k - 1][i] : R(0));
    }
    b.require(columns_ok, "displayed columns v1..v5 not reproduced");

    const RecurrenceSeries short_run = recurrence_series(0.5, 1.0, 10'000);
    const double scaled = std::sqrt(1e4) * short_run.last_term;
    const double target = 1.0 / std::sqrt(std::numbers::pi);
    b.require(std::abs(scaled / target - 1.0) < 0.02, "√k Z_k at k=10^4 not within 2% of 1/√π");

    const RecurrenceSeries long_run = recurrence_series(0.5, 1.0, 1'000'000, 1e-17);
    const double c = long_run.partial_sum / 1000.0;
    const double c_expected = 2.0 / std::sqrt(std::numbers::pi);
    // growth exponent of the partial sums over the last two decades
    const auto& s = long_run.samples;
    const auto it = std::find_if(s.begin(), s.end(), [](const auto& x) { return x.n >= 10'000; });
    const double slope = std::log(s.back().partial_sum / it->partial_sum) /
                         std::log(static_cast<double>(s.back().n) / static_cast<double>(it->n));
    b.require(long_run.verdict == SeriesVerdict::divergent, "series verdict is not divergent");
    b.require(std::abs(slope - 0.5) < 0.01, "partial sums do not grow like √N");
    b.require(std::abs(c / c_expected - 1.0) < 0.01, "S_N/√N not within 1% of 2/√π");
    b.note("k<=30 exact, v1..v5 exact; √k·Z_k(10^4) = " + g(scaled, 6) + " vs 1/√π = " + g(target, 6) +
           "; S(10^6) = " + g(long_run.partial_sum, 7) + " (lower bound, dropped mass " +
           g(long_run.dropped_mass, 2) + "), S/√N = " + g(c, 6) + ", growth exponent " + g(slope, 4));
}

// 9. Dimensions.
void dimensions(Builder& b)
{
    const double closed = std::log(4.0) / std::abs(std::log(0.21));
    const double e = std::abs(dim_escaping(0.3) - closed);
    b.require(e < 1e-12, "dim_escaping(0.3) off by >= 1e-12");

    double prev = 0.0, d512 = 0.0;
    bool increasing = true;
    for (std::size_t K = 2; K <= 512; K *= 2) {
        d512 = dim_truncated(0.7, K);
        increasing = increasing && d512 > prev;
        prev = d512;
    }
    const double limit = -std::log(4.0) / std::log(0.21);
    b.require(increasing, "dim_truncated(0.7, K) not increasing");
    b.require(std::abs(d512 - limit) < 1e-2, "dim_truncated(0.7, 512) not within 1e-2");

    bool symmetric = true;
    for (int k = 6; k <= 25; ++k) {
        const double lambda = k / 32.0;
        symmetric = symmetric && dim_hyperbolic(1.0 - lambda) == dim_escaping(lambda);
    }
    b.require(symmetric, "symmetry not exact");
    b.note("|dim_esc(0.3) - closed| = " + g(e, 2) + "; dim_trunc(0.7,512) = " + g(d512, 8) + " vs " +
           g(limit, 8) + "; symmetry exact on 20 dyadic points");
}

const std::vector<std::pair<double, double>>& growth_grid()
{
    static const std::vector<std::pair<double, double>> grid = [] {
        std::vector<std::pair<double, double>> out;
        for (double lambda : {0.2, 0.3, 0.6, 0.8})
            for (double t : {0.0, 0.5, 1.0, 2.0})
                if (std::abs(std::pow(lambda, t) - 0.5) >= 0.05) out.emplace_back(lambda, t);
        return out;
    }();
    return grid;
}

// 10. Cylinder-sum identity and growth rate.
void cylinder_sums(Builder& b)
{
    double worst_rel = 0.0;
    for (double lambda : {0.2, 0.45, 0.6, 0.8})
        for (double t : {0.0, 0.5, 1.0, 2.0})
            for (std::size_t n = 1; n <= 20; ++n)
                for (std::size_t K : {2u, 5u, 10u, 25u, 50u, 100u})
                    worst_rel = std::max(worst_rel, cylinder_sum(lambda, t, n, K).rel_diff);
    b.require(worst_rel < 1e-12, "via_A != via_B to 1e-12");

    double worst_recurrent = 0.0, worst_transient = 0.0;
    std::string worst_at;
    double worst_all = -1.0;
    for (auto [lambda, t] : growth_grid()) {
        const double gap = std::abs(cylinder_sum(lambda, t, 40, 400).pressure_estimate - pressure_closed(lambda, t));
        double& side = std::pow(lambda, t) < 0.5 ? worst_recurrent : worst_transient;
        side = std::max(side, gap);
        if (gap > worst_all) {
            worst_all = gap;
            worst_at = "λ=" + g(lambda, 2) + ", t=" + g(t, 2);
        }
    }
    b.require(worst_all < 1e-2, "(1/40)·log H not within 1e-2 of P at K=400");
    b.note("max rel |via_A - via_B| = " + g(worst_rel, 2) + "; (1/40)log H vs P over " +
           std::to_string(growth_grid().size()) + " points: λ^t<1/2 max gap " + g(worst_recurrent, 2) +
           ", λ^t>1/2 max gap " + g(worst_transient, 3) + " (worst at " + worst_at + ")");
}

// Companion to 10: the n → ∞ limit at fixed K, log ρ(B^t_K), on the same grid.
void cylinder_growth_limit(Builder& b)
{
    double worst = 0.0;
    for (auto [lambda, t] : growth_grid())
        worst = std::max(worst, std::abs(std::log(perron_root(build(OperatorKind::B, 400, lambda, t))) -
                                         pressure_closed(lambda, t)));
    b.require(worst < 1e-2, "log ρ(B_400) not within 1e-2 of P");
    b.note("n→∞ at K=400: max |log ρ(B^t_K) - P| = " + g(worst, 3) + " over the same grid");
}

struct Entry {
    int id;
    const char* name;
    void (*run)(Builder&);
    bool informational;
};

constexpr Entry kEntries[] = {
    {1, "Pressure closed form vs truncation", pressure_vs_truncation, false},
    {2, "Finite-K eigenvalues", finite_k_eigenvalues, false},
    {3, "Characteristic polynomial identity", char_poly_identity, false},
    {4, "Conformal residuals", conformal_residuals, false},
    {5, "Variational identity", variational_identity, false},
    {6, "Second-order phase transition", phase_transition, false},
    {7, "Recurrence classification by simulation", simulation, false},
    {8, "Null-recurrent partition functions", null_partition, false},
    {9, "Dimensions", dimensions, false},
    {10, "Cylinder-sum identity", cylinder_sums, false},
    {10, "Cylinder-sum growth, fixed-K limit (info)", cylinder_growth_limit, true},
};

CriterionResult execute(const Entry& e)
{
    CriterionResult r;
    r.id = e.id;
    r.name = e.name;
    r.informational = e.informational;
    const auto start = std::chrono::steady_clock::now();
    Builder b;
    try {
        e.run(b);
        r.passed = b.ok;
        r.detail = b.text();
    } catch (const std::exception& ex) {
        r.passed = false;
        r.detail = b.text() + (b.text().empty() ? "" : "; ") + "exception: " + ex.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

} // namespace

std::vector<CriterionResult> run_criterion(int id)
{
    if (id < 1 || id > kCriterionCount) throw DomainError("acceptance criterion must be 1..10");
    std::vector<CriterionResult> out;
    for (const Entry& e : kEntries)
        if (e.id == id) out.push_back(execute(e));
    return out;
}

std::vector<CriterionResult> run_acceptance()
{
    std::vector<CriterionResult> out;
    for (const Entry& e : kEntries) out.push_back(execute(e));
    return out;
}

std::string format_line(const CriterionResult& r)
{
    char head[160];
    std::snprintf(head, sizeof head, "%-4s %2d  %-44s (%.2f s)  ", r.informational ? "INFO" : (r.passed ? "PASS" : "FAIL"),
                  r.id, r.name.c_str(), r.seconds);
    return head + r.detail;
}

bool all_passed(const std::vector<CriterionResult>& results)
{
    return std::all_of(results.begin(), results.end(),
                       [](const CriterionResult& r) { return r.informational || r.passed; });
}

} // namespace lambda_thermo
