#include "lambda_thermo/spectra.hpp"

#include "lambda_thermo/error.hpp"
#include "lambda_thermo/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace lambda_thermo {

std::string_view to_string(OperatorKind kind)
{
    switch (kind) {
    case OperatorKind::A: return "A";
    case OperatorKind::B: return "B";
    case OperatorKind::AHat: return "A-hat";
    case OperatorKind::BHat: return "B-hat";
    case OperatorKind::D: return "D";
    }
    return "?";
}

OperatorKind parse_operator_kind(std::string_view name)
{
    if (name == "A") return OperatorKind::A;
    if (name == "B") return OperatorKind::B;
    if (name == "A-hat" || name == "Ahat" || name == "A_hat") return OperatorKind::AHat;
    if (name == "B-hat" || name == "Bhat" || name == "B_hat") return OperatorKind::BHat;
    if (name == "D") return OperatorKind::D;
    throw DomainError("unknown operator kind '" + std::string(name) + "'");
}

namespace {

// 0-based first nonzero column of row i
inline std::size_t row_start(std::size_t i) { return i <= 1 ? 0 : i - 1; }

} // namespace

TruncatedOperator::TruncatedOperator(OperatorKind kind, double lambda, double t,
                                     std::vector<double> row_weights, double ratio)
    : kind_(kind), lambda_(lambda), t_(t), row_weights_(std::move(row_weights)), ratio_(ratio)
{
    if (row_weights_.empty()) throw DomainError("truncation size K must be >= 1");
}

double TruncatedOperator::entry(std::size_t i, std::size_t j) const
{
    const std::size_t lo = row_start(i);
    if (j < lo) return 0.0;
    return row_weights_[i] * std::pow(ratio_, static_cast<double>(j - lo));
}

void TruncatedOperator::apply_left(std::span<const double> v, std::span<double> out) const
{
    const std::size_t K = size();
    const double q = ratio_;
    const auto& w = row_weights_;
    double T = 0.0;
    for (std::size_t j = 0; j < K; ++j) {
        double u = 0.0;
        if (j == 0) {
            u = v[0] * w[0] + (K > 1 ? v[1] * w[1] : 0.0);
        } else if (j + 1 < K) {
            u = v[j + 1] * w[j + 1];
        }
        T = q * T + u;
        out[j] = T;
    }
}

void TruncatedOperator::apply_right(std::span<const double> v, std::span<double> out) const
{
    const std::size_t K = size();
    // suffix sums S_k = v_k + q S_{k+1}
    std::vector<double> S(K + 1, 0.0);
    for (std::size_t k = K; k-- > 0;) S[k] = v[k] + ratio_ * S[k + 1];
    for (std::size_t i = 0; i < K; ++i) out[i] = row_weights_[i] * S[row_start(i)];
}

std::vector<double> TruncatedOperator::apply_left(std::span<const double> v) const
{
    std::vector<double> out(size());
    apply_left(v, out);
    return out;
}

std::vector<double> TruncatedOperator::apply_right(std::span<const double> v) const
{
    std::vector<double> out(size());
    apply_right(v, out);
    return out;
}

std::vector<double> TruncatedOperator::dense() const
{
    const std::size_t K = size();
    std::vector<double> m(K * K, 0.0);
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = row_start(i); j < K; ++j) m[i * K + j] = entry(i, j);
    return m;
}

TruncatedOperator build(OperatorKind kind, std::size_t K, double lambda, double t)
{
    if (K < 1) throw DomainError("truncation size K must be >= 1");
    if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("lambda must lie in (0,1)");
    const double a = std::exp(t * std::log(lambda));
    const double c = std::exp(t * std::log1p(-lambda));
    double w_first = 0.0, w_rest = 0.0, q = 1.0;
    switch (kind) {
    case OperatorKind::A: w_first = c; w_rest = c; q = a; break;
    case OperatorKind::B: w_first = c; w_rest = c * a; q = 1.0; break;
    case OperatorKind::AHat: w_first = c * a; w_rest = c; q = a; break;
    case OperatorKind::BHat: w_first = c * a; w_rest = c * a; q = 1.0; break;
    case OperatorKind::D: w_first = 0.5; w_rest = 0.25; q = 1.0; break;
    }
    std::vector<double> w(K, w_rest);
    w[0] = w_first;
    return TruncatedOperator(kind, lambda, t, std::move(w), q);
}

// ---------------------------------------------------------------------------
// characteristic polynomials

double CharPoly::operator()(double s) const
{
    double acc = 0.0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * s + *it;
    return acc;
}

Rational ExactCharPoly::operator()(const Rational& s) const
{
    Rational acc = 0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * s + *it;
    return acc;
}

namespace {

template <class T>
std::vector<T> char_poly_recurrence(std::size_t K, const T& a)
{
    std::vector<T> prev{T(1)};
    std::vector<T> cur{T(1), T(-1)};
    if (K == 0) return prev;
    for (std::size_t k = 2; k <= K; ++k) {
        std::vector<T> next(k + 1, T(0));
        // -s α_{k-1} - s a α_{k-2}
        for (std::size_t m = 0; m < cur.size(); ++m) next[m + 1] -= cur[m];
        for (std::size_t m = 0; m < prev.size(); ++m) next[m + 1] -= a * prev[m];
        prev = std::move(cur);
        cur = std::move(next);
    }
    return cur;
}

} // namespace

CharPoly char_poly_from_ratio(std::size_t K, double lambda_t)
{
    if (K < 1) throw DomainError("char_poly: K must be >= 1");
    return {char_poly_recurrence<double>(K, lambda_t)};
}

CharPoly char_poly(std::size_t K, double lambda, double t)
{
    return char_poly_from_ratio(K, std::exp(t * std::log(lambda)));
}

ExactCharPoly char_poly_exact(std::size_t K, const Rational& lambda_t)
{
    if (K < 1) throw DomainError("char_poly: K must be >= 1");
    return {char_poly_recurrence<Rational>(K, lambda_t)};
}

std::vector<Rational> exact_scaled_matrix(OperatorKind kind, std::size_t K, const Rational& a)
{
    if (kind != OperatorKind::A && kind != OperatorKind::B)
        throw DomainError("exact_scaled_matrix: only kinds A and B are supported");
    std::vector<Rational> m(K * K, Rational(0));
    for (std::size_t i = 0; i < K; ++i) {
        for (std::size_t j = row_start(i); j < K; ++j) {
            if (kind == OperatorKind::A)
                m[i * K + j] = i == 0 ? pow(a, static_cast<unsigned>(j))
                                      : pow(a, static_cast<unsigned>(j + 1 - i));
            else
                m[i * K + j] = i == 0 ? Rational(1) : a;
        }
    }
    return m;
}

Rational exact_determinant(std::vector<Rational> matrix, std::size_t n)
{
    if (matrix.size() != n * n) throw DomainError("exact_determinant: size mismatch");
    if (n == 0) return 1;
    // clear denominators row by row, then Bareiss on integers
    std::vector<BigInt> m(n * n);
    BigInt scale = 1;
    for (std::size_t i = 0; i < n; ++i) {
        BigInt l = 1;
        for (std::size_t j = 0; j < n; ++j) {
            const BigInt& d = denominator(matrix[i * n + j]);
            l = l / boost::multiprecision::gcd(l, d) * d;
        }
        scale *= l;
        for (std::size_t j = 0; j < n; ++j) {
            const Rational& x = matrix[i * n + j];
            m[i * n + j] = numerator(x) * (l / denominator(x));
        }
    }
    int sign = 1;
    BigInt prev = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (m[k * n + k] == 0) {
            std::size_t r = k + 1;
            while (r < n && m[r * n + k] == 0) ++r;
            if (r == n) return 0;
            for (std::size_t j = 0; j < n; ++j) std::swap(m[k * n + j], m[r * n + j]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j)
                m[i * n + j] = (m[i * n + j] * m[k * n + k] - m[i * n + k] * m[k * n + j]) / prev;
            m[i * n + k] = 0;
        }
        prev = m[k * n + k];
    }
    BigInt det = m[n * n - 1];
    if (sign < 0) det = -det;
    return Rational(det, scale);
}

bool char_poly_equal_AB(std::size_t K, const Rational& lambda_t, std::size_t exact_bound)
{
    if (K < 1) throw DomainError("char_poly_equal_AB: K must be >= 1");
    if (K > exact_bound)
        throw DomainError("char_poly_equal_AB: K exceeds the exact-arithmetic bound");
    if (lambda_t <= 0) throw DomainError("char_poly_equal_AB: lambda^t must be positive");
    const auto A = exact_scaled_matrix(OperatorKind::A, K, lambda_t);
    const auto B = exact_scaled_matrix(OperatorKind::B, K, lambda_t);
    // two degree-K polynomials agreeing at K+1 points are equal
    for (std::size_t p = 0; p <= K; ++p) {
        const Rational s(static_cast<long long>(p));
        auto a = A, b = B;
        for (std::size_t i = 0; i < K; ++i) {
            a[i * K + i] -= s;
            b[i * K + i] -= s;
        }
        if (exact_determinant(std::move(a), K) != exact_determinant(std::move(b), K)) return false;
    }
    return true;
}

std::vector<double> hessenberg_char_poly(std::span<const double> h, std::size_t n)
{
    // p_k(s) = det of the leading k×k block of (H - sI)
    std::vector<std::vector<double>> p(n + 1);
    p[0] = {1.0};
    for (std::size_t k = 1; k <= n; ++k) {
        const std::size_t c = k - 1;  // 0-based column of the new block
        std::vector<double> pk(k + 1, 0.0);
        for (std::size_t m = 0; m < p[k - 1].size(); ++m) {
            pk[m] += h[c * n + c] * p[k - 1][m];
            pk[m + 1] -= p[k - 1][m];
        }
        // cofactor expansion along the new column; signs alternate
        double sub = 1.0;
        for (std::size_t r = c; r-- > 0;) {
            sub *= -h[(r + 1) * n + r];
            const double coef = h[r * n + c] * sub;
            if (coef == 0.0) continue;
            for (std::size_t m = 0; m < p[r].size(); ++m) pk[m] += coef * p[r][m];
        }
        p[k] = std::move(pk);
    }
    return p[n];
}

bool char_poly_equal_AB(std::size_t K, double lambda, double t, double tol)
{
    if (K < 1) throw DomainError("char_poly_equal_AB: K must be >= 1");
    const double c = std::exp(t * std::log1p(-lambda));
    auto A = build(OperatorKind::A, K, lambda, t).dense();
    auto B = build(OperatorKind::B, K, lambda, t).dense();
    for (auto& x : A) x /= c;
    for (auto& x : B) x /= c;
    const auto pa = hessenberg_char_poly(A, K);
    const auto pb = hessenberg_char_poly(B, K);
    double scale = 1.0;
    for (double x : pa) scale = std::max(scale, std::abs(x));
    for (std::size_t m = 0; m <= K; ++m)
        if (std::abs(pa[m] - pb[m]) > tol * scale) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Perron root and eigenvectors

namespace {

constexpr double kRescale = 1e200;

double max_column_sum(const TruncatedOperator& op, double& min_sum)
{
    std::vector<double> ones(op.size(), 1.0);
    const auto cs = op.apply_left(ones);
    min_sum = *std::min_element(cs.begin(), cs.end());
    return *std::max_element(cs.begin(), cs.end());
}

// True iff σ >= ρ(M): shoot the left vector with v_0 = 1 through the column
// equations 0..K-2 and test the last column.
bool dominates(const TruncatedOperator& op, double sigma)
{
    const std::size_t K = op.size();
    const auto w = op.row_weights();
    const double q = op.ratio();
    if (K == 1) return w[0] <= sigma;
    double prev = 0.0;  // v_{j-1}
    double cur = 1.0;   // v_j
    // column 0: v0 w0 + v1 w1 = σ v0
    double next = (sigma - w[0]) / w[1];
    if (!(next > 0.0)) return false;
    prev = cur;
    cur = next;
    for (std::size_t j = 1; j + 1 < K; ++j) {
        // column j: q σ v_{j-1} + w_{j+1} v_{j+1} = σ v_j
        next = sigma * (cur - q * prev) / w[j + 1];
        if (!(next > 0.0)) return false;
        prev = cur;
        cur = next;
        if (cur > kRescale) {
            prev /= kRescale;
            cur /= kRescale;
        }
    }
    // last column: q σ v_{K-2} <= σ v_{K-1}
    return q * prev <= cur;
}

double sup_norm(std::span<const double> v)
{
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

void normalize(SpectralResult& r)
{
    auto& v = r.left_vector;
    const double m = sup_norm(v);
    if (v[0] > 0.0 && m / v[0] <= 1e280) {
        const double v0 = v[0];
        for (double& x : v) x /= v0;
        v[0] = 1.0;
        r.first_normalized = true;
    } else {
        for (double& x : v) x /= m;
        r.first_normalized = false;
    }
}

} // namespace

double residual_of(const TruncatedOperator& op, std::span<const double> v, double value)
{
    const auto y = op.apply_left(v);
    double d = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) d = std::max(d, std::abs(y[j] - value * v[j]));
    return d / (value * sup_norm(v));
}

double perron_root(const TruncatedOperator& op, double rel_tol)
{
    rel_tol = std::max(rel_tol, 4 * std::numeric_limits<double>::epsilon());
    double lo = 0.0;
    double hi = max_column_sum(op, lo);
    // Collatz-Wielandt with the all-ones vector brackets ρ
    if (dominates(op, lo)) return lo;
    while (hi - lo > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (dominates(op, mid) ? hi : lo) = mid;
    }
    return hi;
}

SpectralResult leading_eigen(const TruncatedOperator& op, double tol, long max_iter)
{
    const std::size_t K = op.size();
    const auto w = op.row_weights();
    const double q = op.ratio();
    SpectralResult r;
    r.value = perron_root(op);
    const double sigma = r.value;

    // Backward recurrence from the last two columns; stable because it runs
    // against the growth of the dominant solution.
    std::vector<double> v(K, 0.0);
    v[K - 1] = 1.0;
    if (K >= 2) v[K - 2] = v[K - 1] / q;
    for (std::size_t j = K - 2; j >= 1 && j < K; --j) {
        v[j - 1] = (v[j] - w[j + 1] * v[j + 1] / sigma) / q;
        if (std::abs(v[j - 1]) > 1e280) {
            for (std::size_t k = j - 1; k < K; ++k) v[k] /= 1e280;
        }
    }
    for (double& x : v)
        if (!(x > 0.0)) x = 0.0;
    r.left_vector = std::move(v);
    normalize(r);
    r.residual = residual_of(op, r.left_vector, sigma);

    // polish with power steps if the recurrence lost accuracy
    std::vector<double> y(K);
    while (!(r.residual <= tol) && r.iterations < max_iter) {
        op.apply_left(r.left_vector, y);
        const double m = sup_norm(y);
        for (std::size_t j = 0; j < K; ++j) r.left_vector[j] = y[j] / m;
        ++r.iterations;
        if (r.iterations % 64 == 0 || r.iterations == max_iter) {
            normalize(r);
            r.residual = residual_of(op, r.left_vector, sigma);
        }
    }
    if (!(r.residual <= tol))
        throw NonConvergence("leading_eigen: residual above tolerance after max_iter steps",
                             r.residual);
    normalize(r);
    return r;
}

SpectralResult power_iteration(const TruncatedOperator& op, double tol, long max_iter)
{
    const std::size_t K = op.size();
    std::vector<double> v(K, 1.0), y(K);
    SpectralResult r;
    double e0 = 0.0, e1 = 0.0, e2 = 0.0;  // last three estimates
    double lo = 0.0, hi = 0.0;
    for (long it = 1; it <= max_iter; ++it) {
        op.apply_left(v, y);
        lo = std::numeric_limits<double>::infinity();
        hi = 0.0;
        for (std::size_t j = 0; j < K; ++j) {
            const double ratio = y[j] / v[j];
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
        const double m = sup_norm(y);
        e0 = e1;
        e1 = e2;
        e2 = m;  // v is sup-normalised, so this is ‖vM‖/‖v‖
        for (std::size_t j = 0; j < K; ++j) v[j] = y[j] / m;
        r.iterations = it;
        if (hi - lo <= tol * hi) break;
    }
    double est = e2;
    if (r.iterations >= 3) {
        const double d = e2 - 2 * e1 + e0;
        if (d != 0.0) {
            const double aitken = e2 - (e2 - e1) * (e2 - e1) / d;
            if (std::isfinite(aitken)) est = aitken;
        }
    }
    r.value = std::clamp(est, lo, hi);
    r.left_vector = std::move(v);
    r.residual = residual_of(op, r.left_vector, r.value);
    if (!(hi - lo <= tol * hi) && !(r.residual <= tol))
        throw NonConvergence("power_iteration: no convergence within max_iter", r.residual);
    normalize(r);
    return r;
}

EigvecCheck eigvec_recurrence_check(const SpectralResult& result, double lambda, double t)
{
    const auto& v = result.left_vector;
    const std::size_t K = v.size();
    if (K < 2) throw DomainError("eigvec_recurrence_check: K must be >= 2");
    if (!result.first_normalized)
        throw DomainError("eigvec_recurrence_check: eigenvector is not normalised by v_1");
    const double a = std::exp(t * std::log(lambda));
    const double c = std::exp(t * std::log1p(-lambda));
    EigvecCheck out;
    out.r = result.value / (a * c);
    const double r = out.r;
    const auto rel = [](double got, double want) {
        return std::abs(got - want) / std::max(std::abs(want), std::numeric_limits<double>::min());
    };
    // a_0 = 0, a_1 = 1, a_n = r(a_{n-1} - a_{n-2}); v_j = a_j - a_{j-1}/λ^t
    std::vector<double> an(K + 1, 0.0);
    an[1] = 1.0;
    for (std::size_t n = 2; n <= K; ++n) an[n] = r * (an[n - 1] - an[n - 2]);
    if (K >= 3) out.v2_defect = rel(v[1], r - 1.0 / a);
    if (K >= 4) out.v3_defect = rel(v[2], r * r - (1.0 + 1.0 / a) * r);
    out.tail_defect = rel(v[K - 2], v[K - 1]);
    for (std::size_t j = 3; j + 1 <= K; ++j) {
        const double predicted = an[j] - an[j - 1] / a;
        out.max_defect = std::max(out.max_defect, rel(v[j - 1], predicted));
    }
    return out;
}

// ---------------------------------------------------------------------------
// closed forms

namespace {

void require_lambda(double lambda)
{
    if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("lambda must lie in (0,1)");
}

// d/dt log ψ and d²/dt² log ψ
void log_psi_derivatives(double lambda, double t, double& d1, double& d2)
{
    const double l = std::log(lambda);
    const double a = std::exp(t * l);
    const double one_minus_a = -std::expm1(t * l);
    d1 = std::log1p(-lambda) + a * l / one_minus_a;
    d2 = a * l * l / (one_minus_a * one_minus_a);
}

} // namespace

double psi(double lambda, double t)
{
    require_lambda(lambda);
    if (t == 0.0) throw DomainError("psi has a pole at t = 0");
    return std::exp(t * std::log1p(-lambda)) / -std::expm1(t * std::log(lambda));
}

double psi_prime(double lambda, double t)
{
    double d1, d2;
    const double p = psi(lambda, t);
    log_psi_derivatives(lambda, t, d1, d2);
    return p * d1;
}

double psi_second(double lambda, double t)
{
    double d1, d2;
    const double p = psi(lambda, t);
    log_psi_derivatives(lambda, t, d1, d2);
    return p * (d1 * d1 + d2);
}

double pressure_closed(double lambda, double t)
{
    require_lambda(lambda);
    const double l = std::log(lambda);
    const double l1 = std::log1p(-lambda);
    if (std::exp(t * l) <= 0.5) return t * l1 - std::log(-std::expm1(t * l));
    return 2 * std::numbers::ln2 + t * (l + l1);
}

double t0(double lambda)
{
    require_lambda(lambda);
    return -std::numbers::ln2 / std::log(lambda);
}

PhaseTransitionReport phase_transition_report(double lambda, double h)
{
    PhaseTransitionReport rep;
    rep.lambda = lambda;
    rep.t0 = t0(lambda);
    const double l = std::log(lambda);
    rep.expected_first = l + std::log1p(-lambda);
    rep.expected_right_second = 2 * l * l;

    const double t = rep.t0;
    const auto f = [&](double s) { return pressure_closed(lambda, s); };
    // second-order one-sided stencils; dir = -1 samples t0 - kh, +1 samples t0 + kh
    const auto first = [&](double step, double dir) {
        return dir * (-3 * f(t) + 4 * f(t + dir * step) - f(t + 2 * dir * step)) / (2 * step);
    };
    const auto second = [&](double step, double dir) {
        return (2 * f(t) - 5 * f(t + dir * step) + 4 * f(t + 2 * dir * step) - f(t + 3 * dir * step)) /
               (step * step);
    };
    const auto richardson = [&](auto&& D, double dir) {
        return (4 * D(h / 2, dir) - D(h, dir)) / 3;
    };
    rep.left_first = richardson(first, -1.0);
    rep.right_first = richardson(first, +1.0);
    rep.left_second = richardson(second, -1.0);
    rep.right_second = richardson(second, +1.0);
    return rep;
}

std::vector<PressureSample> pressure_curve(double lambda, std::span<const double> t_grid,
                                           std::span<const std::size_t> k_schedule)
{
    require_lambda(lambda);
    for (double t : t_grid)
        if (!std::isfinite(t)) throw DomainError("pressure_curve: grid must be finite");
    const double l = std::log(lambda);
    const double l1 = std::log1p(-lambda);
    std::vector<PressureSample> out(t_grid.size());
    parallel_for(t_grid.size(), [&](std::size_t k) {
        PressureSample s;
        s.t = t_grid[k];
        s.pressure = pressure_closed(lambda, s.t);
        for (std::size_t K : k_schedule)
            s.truncated.push_back(perron_root(build(OperatorKind::B, K, lambda, s.t)));
        if (s.t >= 0.0) {
            const double upper = 2 * std::numbers::ln2 + s.t * l1;
            const double lower = 2 * std::numbers::ln2 + s.t * (l + l1);
            const double slack = 1e-12 * (1.0 + std::abs(s.pressure));
            s.envelope_ok = upper + slack >= s.pressure && s.pressure >= lower - slack;
        }
        out[k] = std::move(s);
    });
    return out;
}

} // namespace lambda_thermo
