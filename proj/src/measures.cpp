#include "lambda_thermo/measures.hpp"

#include "lambda_thermo/error.hpp"
#include "lambda_thermo/spectra.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace lambda_thermo {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_lambda(double lambda)
{
    if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("lambda must lie in (0,1)");
}

double lambda_t(double lambda, double t) { return std::exp(t * std::log(lambda)); }

// Σ_{j >= k} j^moment γ^j = γ^k Σ_{m >= 0} (k+m)^moment γ^m, moment <= 2
double geometric_tail(double gamma, State k, int moment)
{
    const double g = gamma;
    const double s0 = 1.0 / (1.0 - g);
    const double s1 = g / ((1.0 - g) * (1.0 - g));
    const double s2 = g * (1.0 + g) / ((1.0 - g) * (1.0 - g) * (1.0 - g));
    const double kk = static_cast<double>(k);
    double inner = 0.0;
    switch (moment) {
    case 0: inner = s0; break;
    case 1: inner = kk * s0 + s1; break;
    default: inner = kk * kk * s0 + 2 * kk * s1 + s2; break;
    }
    return std::pow(g, kk) * inner;
}

double rel_defect(double got, double want)
{
    const double scale = std::max(std::abs(want), std::numeric_limits<double>::min());
    return std::abs(got - want) / scale;
}

} // namespace

std::string law_name(const TailLaw& law)
{
    return std::visit(overloaded{[](const GeometricLaw&) { return std::string("geometric"); },
                                 [](const PolyGeometricLaw&) { return std::string("poly-geometric"); },
                                 [](const TwoTermLaw&) { return std::string("two-term"); }},
                      law);
}

StateMeasure::StateMeasure(TailLaw law) : law_(law)
{
    const auto check_ratio = [](double g) {
        if (!(g > 0.0 && g < 1.0)) throw DomainError("tail ratio must lie in (0,1)");
    };
    std::visit(overloaded{[&](const GeometricLaw& l) { check_ratio(l.gamma); },
                          [&](const PolyGeometricLaw& l) { check_ratio(l.gamma); },
                          [&](const TwoTermLaw& l) {
                              check_ratio(l.r_plus);
                              check_ratio(l.r_minus);
                          }},
               law_);
}

double StateMeasure::law_mass(State k) const
{
    const double kk = static_cast<double>(k);
    return std::visit(
        overloaded{[&](const GeometricLaw& l) { return l.C * std::pow(l.gamma, kk); },
                   [&](const PolyGeometricLaw& l) { return (l.A + l.B * kk) * std::pow(l.gamma, kk); },
                   [&](const TwoTermLaw& l) {
                       return l.A_plus * std::pow(l.r_plus, kk) + l.A_minus * std::pow(l.r_minus, kk);
                   }},
        law_);
}

double StateMeasure::law_tail(State k, int moment) const
{
    return std::visit(
        overloaded{[&](const GeometricLaw& l) { return l.C * geometric_tail(l.gamma, k, moment); },
                   [&](const PolyGeometricLaw& l) {
                       return l.A * geometric_tail(l.gamma, k, moment) +
                              l.B * geometric_tail(l.gamma, k, moment + 1);
                   },
                   [&](const TwoTermLaw& l) {
                       return l.A_plus * geometric_tail(l.r_plus, k, moment) +
                              l.A_minus * geometric_tail(l.r_minus, k, moment);
                   }},
        law_);
}

double StateMeasure::mass(State k) const
{
    if (k < 1) throw DomainError("state index must be >= 1");
    double m = law_mass(k);
    for (const auto& [j, f] : adjustments_)
        if (j == k) m *= f;
    return m;
}

double StateMeasure::tail_sum(State k) const
{
    k = std::max<State>(k, 1);
    double s = law_tail(k, 0);
    for (const auto& [j, f] : adjustments_)
        if (j >= k) s += (f - 1.0) * law_mass(j);
    return s;
}

double StateMeasure::tail_first_moment(State k) const
{
    k = std::max<State>(k, 1);
    double s = law_tail(k, 1);
    for (const auto& [j, f] : adjustments_)
        if (j >= k) s += (f - 1.0) * static_cast<double>(j) * law_mass(j);
    return s;
}

double StateMeasure::tail_mean(State k) const
{
    k = std::max<State>(k, 1);
    if (!adjustments_.empty()) return tail_first_moment(k) / tail_sum(k);
    const double kk = static_cast<double>(k);
    // Σ_{j>=k} j^m γ^{j-k} for m = 0, 1, 2
    auto moments = [kk](double g) {
        const double s0 = 1.0 / (1.0 - g);
        const double s1 = g * s0 * s0;
        const double s2 = g * (1.0 + g) * s0 * s0 * s0;
        return std::array<double, 3>{s0, kk * s0 + s1, kk * kk * s0 + 2 * kk * s1 + s2};
    };
    return std::visit(
        overloaded{[&](const GeometricLaw& l) {
                       const auto m = moments(l.gamma);
                       return m[1] / m[0];
                   },
                   [&](const PolyGeometricLaw& l) {
                       const auto m = moments(l.gamma);
                       return (l.A * m[1] + l.B * m[2]) / (l.A * m[0] + l.B * m[1]);
                   },
                   [&](const TwoTermLaw& l) {
                       double A_hi = l.A_plus, r_hi = l.r_plus, A_lo = l.A_minus, r_lo = l.r_minus;
                       if (r_lo > r_hi) {
                           std::swap(A_hi, A_lo);
                           std::swap(r_hi, r_lo);
                       }
                       const auto mh = moments(r_hi);
                       const auto ml = moments(r_lo);
                       const double rel = A_lo * std::pow(r_lo / r_hi, kk);
                       return (A_hi * mh[1] + rel * ml[1]) / (A_hi * mh[0] + rel * ml[0]);
                   }},
        law_);
}

bool StateMeasure::normalized() const { return std::abs(total() - 1.0) <= 1e-12; }

bool StateMeasure::positive() const
{
    for (const auto& [j, f] : adjustments_)
        if (!(f > 0.0)) return false;
    return std::visit(
        overloaded{[](const GeometricLaw& l) { return l.C > 0.0; },
                   [](const PolyGeometricLaw& l) { return l.B >= 0.0 && l.A + l.B > 0.0; },
                   [&](const TwoTermLaw& l) {
                       // order the roots so that `hi` dominates as k → ∞
                       double A_hi = l.A_plus, A_lo = l.A_minus;
                       if (l.r_minus > l.r_plus) std::swap(A_hi, A_lo);
                       if (l.r_plus == l.r_minus) return A_hi + A_lo > 0.0;
                       if (A_hi < 0.0) return false;
                       if (A_hi == 0.0) return A_lo > 0.0;
                       // x_k / r_hi^k is monotone in k: check k = 1
                       return A_lo >= 0.0 || law_mass(1) > 0.0;
                   }},
        law_);
}

StateMeasure StateMeasure::perturbed(State k, double factor) const
{
    if (k < 1) throw DomainError("state index must be >= 1");
    StateMeasure out = *this;
    out.adjustments_.emplace_back(k, factor);
    return out;
}

std::vector<double> StateMeasure::masses(State k_max) const
{
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(std::max<State>(k_max, 0)));
    for (State k = 1; k <= k_max; ++k) out.push_back(mass(k));
    return out;
}

// ---------------------------------------------------------------------------

double conformal_pressure(double lambda, double t) { return pressure_closed(lambda, t); }

ConformalSolution conformal_solution(double lambda, double t, double p)
{
    require_lambda(lambda);
    const double a = lambda_t(lambda, t);
    ConformalSolution sol;
    sol.c = std::exp(-p + t * (std::log(lambda) + std::log1p(-lambda)));
    const double disc = 1.0 - 4.0 * sol.c;
    if (!(disc > 0.0))
        throw DomainError("conformal_solution: p must lie strictly above the conformal pressure");
    const double s = std::sqrt(disc);
    sol.r_plus = 0.5 * (1.0 + s);
    sol.r_minus = 2.0 * sol.c / (1.0 + s);
    // r₊ - 2c = s(1+s)/2 and 2c - r₋ = s(1-s)/2, written without cancellation
    sol.A_plus = sol.c * (a - sol.r_minus) / (a * 0.5 * s * (1.0 + s));
    sol.A_minus = sol.c * (sol.r_plus - a) / (a * 0.5 * s * (1.0 - s));
    return sol;
}

StateMeasure conformal_measure(double lambda, double t, double p, double boundary_tol)
{
    require_lambda(lambda);
    const double P = conformal_pressure(lambda, t);
    const double p_tol = 1e-12 * std::max(1.0, std::abs(P));
    if (p < P - p_tol)
        throw DomainError("no conformal measure: p lies below the conformal pressure");
    const double a = lambda_t(lambda, t);
    if (p <= P + p_tol) {
        if (std::abs(a - 0.5) < boundary_tol) return StateMeasure(PolyGeometricLaw{1.0, 0.0, 0.5});
        if (a < 0.5) return StateMeasure(GeometricLaw{(1.0 - a) / a, a});
        // [(k-1) + a^{-1}(1 - k/2)] 2^{-k}
        return StateMeasure(PolyGeometricLaw{1.0 / a - 1.0, 1.0 - 0.5 / a, 0.5});
    }
    const auto sol = conformal_solution(lambda, t, p);
    return StateMeasure(TwoTermLaw{sol.A_plus, sol.r_plus, sol.A_minus, sol.r_minus});
}

double conformal_residual(const StateMeasure& m, double lambda, double t, double p, State k_max)
{
    require_lambda(lambda);
    if (k_max < 2) throw DomainError("conformal_residual: k_max must be >= 2");
    const double l = std::log(lambda), l1 = std::log1p(-lambda);
    const double w1 = std::exp(-p + t * l1);
    const double wk = std::exp(-p + t * (l + l1));
    double worst = rel_defect(w1 * m.tail_sum(1), m.mass(1));
    for (State k = 2; k <= k_max; ++k) worst = std::max(worst, rel_defect(wk * m.tail_sum(k - 1), m.mass(k)));
    return worst;
}

StateMeasure invariant_measure(double lambda, double t)
{
    require_lambda(lambda);
    const double a = lambda_t(lambda, t);
    if (!(a < 0.5))
        throw DomainError("no invariant probability absolutely continuous w.r.t. the conformal "
                          "measure when lambda^t >= 1/2");
    return StateMeasure(GeometricLaw{(1.0 - 2.0 * a) / a, a / (1.0 - a)});
}

StateMeasure acip(double lambda)
{
    require_lambda(lambda);
    if (lambda == 0.5) throw DomainError("no acip at lambda = 1/2: Lebesgue measure is null recurrent");
    if (lambda > 0.5) throw DomainError("no acip for lambda > 1/2: Lebesgue measure is dissipative");
    return invariant_measure(lambda, 1.0);
}

double conformal_transition(State i, State j, double lambda, double t)
{
    require_lambda(lambda);
    if (i < 1 || j < 1) throw DomainError("state index must be >= 1");
    const double a = lambda_t(lambda, t);
    const State lo = std::max<State>(i - 1, 1);
    if (j < lo) return 0.0;
    return (1.0 - a) * std::pow(a, static_cast<double>(j - lo));
}

double stationarity_residual(double lambda, double t, State j_max)
{
    const auto mu = invariant_measure(lambda, t);
    double worst = 0.0;
    for (State j = 1; j <= j_max; ++j) {
        // only states i <= j+1 reach j
        double s = 0.0;
        for (State i = 1; i <= j + 1; ++i) s += mu.mass(i) * conformal_transition(i, j, lambda, t);
        worst = std::max(worst, rel_defect(s, mu.mass(j)));
    }
    return worst;
}

double density_ratio(State n, double lambda, double t)
{
    require_lambda(lambda);
    if (n < 1) throw DomainError("state index must be >= 1");
    const double a = lambda_t(lambda, t);
    if (!(a < 0.5)) throw DomainError("density_ratio requires lambda^t < 1/2");
    return (1.0 - 2.0 * a) * std::exp(-static_cast<double>(n + 1) * std::log1p(-a));
}

double log_cylinder_conformal_mass(const CylinderWord& word, double lambda, double t)
{
    const MapParams mp(lambda);
    word.require_admissible();
    const double a = lambda_t(lambda, t);
    if (!(a < 0.5)) throw DomainError("cylinder_conformal_mass requires lambda^t < 1/2");
    const double p = std::log(psi(lambda, t));
    const double n = static_cast<double>(word.size());
    const double tail = static_cast<double>(std::max<State>(word.back() - 2, 0));
    return -n * p + ergodic_sum_phi(word, {t, p}, mp) + tail * t * mp.log_lambda();
}

double cylinder_conformal_mass(const CylinderWord& word, double lambda, double t)
{
    return std::exp(log_cylinder_conformal_mass(word, lambda, t));
}

double gibbs_ratio(const CylinderWord& word, double lambda, double t)
{
    word.require_admissible();
    const double a = lambda_t(lambda, t);
    const double tail = static_cast<double>(std::max<State>(word.back() - 2, 0));
    return density_ratio(word.front(), lambda, t) * std::pow(a, tail);
}

double markov_cylinder_mass(const CylinderWord& word, double lambda, double t)
{
    word.require_admissible();
    double m = invariant_measure(lambda, t).mass(word.front());
    for (std::size_t k = 0; k + 1 < word.size(); ++k) m *= conformal_transition(word[k], word[k + 1], lambda, t);
    return m;
}

std::vector<double> eigenfunction(double lambda, double t, State j_max)
{
    require_lambda(lambda);
    const double a = lambda_t(lambda, t);
    if (a > 0.5 && std::abs(a - 0.5) >= 1e-12)
        throw DomainError("eigenfunction: unsupported for lambda^t > 1/2 (transient)");
    std::vector<double> h;
    const double l = -std::log1p(-a);
    for (State j = 1; j <= j_max; ++j) h.push_back(std::exp(static_cast<double>(j - 1) * l));
    return h;
}

double eigenfunction_residual(double lambda, double t, State i_max)
{
    const auto h = eigenfunction(lambda, t, i_max + 1);
    const double a = lambda_t(lambda, t);
    const double c = std::exp(t * std::log1p(-lambda));
    const double ps = psi(lambda, t);
    double worst = 0.0;
    for (State i = 1; i <= i_max; ++i) {
        double s = 0.0;
        for (State j = 1; j <= i + 1; ++j) s += (j == 1 ? c : c * a) * h[static_cast<std::size_t>(j - 1)];
        worst = std::max(worst, rel_defect(s, ps * h[static_cast<std::size_t>(i - 1)]));
    }
    return worst;
}

RhoIntegral rho_integral(double lambda, double t, double boundary_tol)
{
    require_lambda(lambda);
    const double a = lambda_t(lambda, t);
    if (std::abs(a - 0.5) < boundary_tol) return {std::numeric_limits<double>::infinity(), true};
    if (a > 0.5) throw DomainError("rho_integral requires lambda^t <= 1/2");
    return {(1.0 - a) / (1.0 - 2.0 * a), false};
}

VariationalValue variational_value(double lambda, double t)
{
    require_lambda(lambda);
    const double a = lambda_t(lambda, t);
    if (!(a < 0.5)) throw DomainError("no equilibrium state when lambda^t >= 1/2");
    const double l = std::log(lambda), l1 = std::log1p(-lambda);
    VariationalValue v;
    // every row is the geometric law (1-a) a^m, m >= 0
    v.entropy = -std::log1p(-a) - a / (1.0 - a) * (t * l);
    const double v1 = (1.0 - 2.0 * a) / (1.0 - a);
    v.integral = t * l1 + (1.0 - v1) * t * l;
    v.sum = v.entropy + v.integral;
    v.log_psi = t * l1 - std::log1p(-a);
    return v;
}

} // namespace lambda_thermo
