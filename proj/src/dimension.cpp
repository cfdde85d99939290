#include "lambda_thermo/dimension.hpp"

#include "lambda_thermo/error.hpp"
#include "lambda_thermo/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace lambda_thermo {

namespace {

void require_lambda(double lambda, const char* who)
{
    if (!(lambda > 0.0 && lambda < 1.0))
        throw DomainError(std::string(who) + ": lambda must lie in (0,1)");
}

const double kLog4 = 2.0 * std::numbers::ln2;

template <class F>
double bisect_decreasing(F&& f, double lo, double hi, double tol)
{
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

double t1(double lambda)
{
    require_lambda(lambda, "t1");
    if (lambda <= 0.5) return 1.0;
    return -kLog4 / std::log(lambda * (1.0 - lambda));
}

double t1_root_find(double lambda, double tol)
{
    require_lambda(lambda, "t1_root_find");
    auto P = [lambda](double t) { return pressure_closed(lambda, t); };
    const double lo = 0.01, hi = 4.0;
    if (!(P(lo) > 0.0 && P(hi) < 0.0)) {
        std::ostringstream msg;
        msg << "t1_root_find: pressure does not change sign on [0.01, 4] (P(0.01) = " << P(lo)
            << ", P(4) = " << P(hi) << ")";
        throw NonConvergence(msg.str(), 0.0);
    }
    return bisect_decreasing(P, lo, hi, tol);
}

double dim_escaping(double lambda)
{
    require_lambda(lambda, "dim_escaping");
    if (lambda <= 0.5) return -kLog4 / std::log(lambda * (1.0 - lambda));
    return 1.0;
}

double dim_hyperbolic(double lambda)
{
    require_lambda(lambda, "dim_hyperbolic");
    return dim_escaping(1.0 - lambda);
}

std::string_view to_string(DimensionMethod m)
{
    return m == DimensionMethod::closed_form ? "closed_form" : "root_find";
}

DimensionMethod parse_dimension_method(std::string_view name)
{
    if (name == "closed_form" || name == "closed-form") return DimensionMethod::closed_form;
    if (name == "root_find" || name == "root-find") return DimensionMethod::root_find;
    throw DomainError("unknown dimension method: " + std::string(name));
}

DimensionReport dimension_report(double lambda, DimensionMethod method)
{
    require_lambda(lambda, "dimension_report");
    DimensionReport r;
    r.lambda = lambda;
    r.method = method;
    if (method == DimensionMethod::closed_form) {
        r.dim_escaping = dim_escaping(lambda);
        r.dim_hyperbolic = dim_hyperbolic(lambda);
        r.t1 = t1(lambda);
    } else {
        r.t1 = t1_root_find(lambda);
        r.dim_hyperbolic = r.t1;
        r.dim_escaping = t1_root_find(1.0 - lambda);
    }
    return r;
}

double dim_truncated(double lambda, std::size_t K, double tol)
{
    require_lambda(lambda, "dim_truncated");
    if (K < 2) throw DomainError("dim_truncated: K must be >= 2");
    if (!(tol > 0.0)) throw DomainError("dim_truncated: tol must be positive");
    auto f = [&](double t) { return std::log(perron_root(build(OperatorKind::B, K, lambda, t))); };
    const double lo = 1e-3, hi = 8.0;
    const double f_lo = f(lo), f_hi = f(hi);
    if (!(f_lo > 0.0 && f_hi < 0.0)) {
        std::ostringstream msg;
        msg << "dim_truncated: no sign change of log rho(B_K^t) on [1e-3, 8] (lambda = " << lambda
            << ", K = " << K << ", f(1e-3) = " << f_lo << ", f(8) = " << f_hi << ")";
        throw DomainError(msg.str());
    }
    return bisect_decreasing(f, lo, hi, tol);
}

CylinderSum cylinder_sum(double lambda, double t, std::size_t n, std::size_t K)
{
    require_lambda(lambda, "cylinder_sum");
    if (n < 1) throw DomainError("cylinder_sum: n must be >= 1");
    if (K < 2) throw DomainError("cylinder_sum: K must be >= 2");
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("cylinder_sum: t must be nonnegative");

    // |W_j|^t = (λ^{j-1}(1-λ))^t
    std::vector<double> w(K);
    const double log_lambda = std::log(lambda), log_gap = std::log1p(-lambda);
    for (std::size_t j = 0; j < K; ++j) w[j] = std::exp(t * (static_cast<double>(j) * log_lambda + log_gap));

    const TruncatedOperator A = build(OperatorKind::A, K, lambda, t);
    const TruncatedOperator B = build(OperatorKind::B, K, lambda, t);

    auto rescale = [](std::vector<double>& v, double& log_scale) {
        const double m = *std::max_element(v.begin(), v.end());
        for (double& x : v) x /= m;
        log_scale += std::log(m);
    };

    std::vector<double> a = w, b = w, tmp(K);
    double log_a = 0.0, log_b = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        A.apply_left(a, tmp);
        a.swap(tmp);
        rescale(a, log_a);
        B.apply_right(b, tmp);
        b.swap(tmp);
        rescale(b, log_b);
    }
    double sa = 0.0, sb = 0.0;
    for (double x : a) sa += x;
    for (double x : b) sb += x;

    CylinderSum out;
    out.log_via_A = log_a + std::log(sa);
    out.log_via_B = log_b + std::log(sb);
    const double d = out.log_via_A - out.log_via_B;
    out.rel_diff = -std::expm1(-std::abs(d));
    out.pressure_estimate = out.log_via_B / static_cast<double>(n);
    return out;
}

} // namespace lambda_thermo
