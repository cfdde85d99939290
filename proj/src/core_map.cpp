#include "lambda_thermo/core_map.hpp"

#include "lambda_thermo/error.hpp"

#include <cmath>
#include <string>

namespace lambda_thermo {

MapParams::MapParams(double lambda) : lambda_(lambda)
{
    if (!(lambda > 0.0 && lambda < 1.0))
        throw DomainError("lambda must lie in (0,1), got " + std::to_string(lambda));
    log_lambda_ = std::log(lambda);
    log1m_lambda_ = std::log1p(-lambda);
}

double MapParams::lambda_pow(State k) const
{
    return std::pow(lambda_, static_cast<double>(k));
}

void validate(const StatePoint& pt)
{
    if (pt.state < 1) throw DomainError("state index must be >= 1");
    if (!(pt.rel > 0.0 && pt.rel <= 1.0))
        throw DomainError("relative coordinate must lie in (0,1]");
}

State partition_index(double x, const MapParams& params)
{
    if (!(x > 0.0 && x <= 1.0))
        throw DomainError("partition_index: x must lie in (0,1]");
    if (x == 1.0) return 1;
    auto n = static_cast<State>(std::floor(std::log(x) / params.log_lambda())) + 1;
    if (n < 1) n = 1;
    // the logarithm can be off by one at the cell boundaries λ^n
    while (n > 1 && x > params.lambda_pow(n - 1)) --n;
    while (x <= params.lambda_pow(n)) ++n;
    return n;
}

namespace {

// position of u inside its own cell, clamped into (0,1]
double relative_coordinate(double u, State cell, const MapParams& params)
{
    const double lo = params.lambda_pow(cell);
    const double hi = params.lambda_pow(cell - 1);
    double rel = (u - lo) / (hi - lo);
    if (rel > 1.0) rel = 1.0;
    if (!(rel > 0.0)) rel = std::nextafter(0.0, 1.0);
    return rel;
}

} // namespace

StatePoint from_real(double x, const MapParams& params)
{
    const State n = partition_index(x, params);
    return {n, relative_coordinate(x, n, params)};
}

double to_real(const StatePoint& pt, const MapParams& params)
{
    const double lam = params.lambda();
    return params.lambda_pow(pt.state - 1) * (lam + pt.rel * (1.0 - lam));
}

StatePoint step(const StatePoint& pt, const MapParams& params)
{
    validate(pt);
    // F maps W_1 affinely onto (0,1] and W_n onto (0, λ^{n-2}]; in both
    // cases the image has relative coordinate rel inside the image interval,
    // so the new cell is shifted by n-2 from the cell of rel itself.
    const State m = partition_index(pt.rel, params);
    const double rel = relative_coordinate(pt.rel, m, params);
    const State shift = pt.state >= 2 ? pt.state - 2 : 0;
    return {m + shift, rel};
}

CylinderWord::CylinderWord(std::vector<State> symbols) : symbols_(std::move(symbols)) {}

CylinderWord::CylinderWord(std::initializer_list<State> symbols) : symbols_(symbols) {}

bool CylinderWord::admissible() const noexcept
{
    for (std::size_t k = 0; k < symbols_.size(); ++k) {
        if (symbols_[k] < 1) return false;
        if (k + 1 < symbols_.size() && symbols_[k + 1] < symbols_[k] - 1) return false;
    }
    return true;
}

void CylinderWord::require_admissible() const
{
    if (symbols_.empty()) throw InadmissibleWord("empty cylinder word");
    if (!admissible()) throw InadmissibleWord("cylinder word is not admissible (empty cylinder)");
}

CylinderWord CylinderWord::extended(State next) const
{
    auto s = symbols_;
    s.push_back(next);
    return CylinderWord(std::move(s));
}

CylinderWord itinerary(StatePoint pt, std::size_t n, const MapParams& params)
{
    validate(pt);
    std::vector<State> symbols;
    symbols.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        symbols.push_back(pt.state);
        if (k + 1 < n) pt = step(pt, params);
    }
    return CylinderWord(std::move(symbols));
}

double log_abs_deriv(State state, const MapParams& params)
{
    if (state < 1) throw DomainError("state index must be >= 1");
    if (state == 1) return -params.log_one_minus_lambda();
    return -(params.log_lambda() + params.log_one_minus_lambda());
}

double ergodic_sum_phi(const CylinderWord& word, const PotentialParams& potential,
                       const MapParams& params)
{
    word.require_admissible();
    if (potential.t == 0.0) return 0.0;
    double sum = 0.0;
    for (State e : word.symbols()) sum += log_abs_deriv(e, params);
    return -potential.t * sum;
}

double log_cylinder_length(const CylinderWord& word, const MapParams& params)
{
    word.require_admissible();
    double log_len = 0.0;
    for (std::size_t k = 0; k + 1 < word.size(); ++k) log_len -= log_abs_deriv(word[k], params);
    // |W_j| = λ^{j-1}(1-λ)
    const State last = word.back();
    log_len += static_cast<double>(last - 1) * params.log_lambda() + params.log_one_minus_lambda();
    return log_len;
}

double cylinder_length(const CylinderWord& word, const MapParams& params)
{
    return std::exp(log_cylinder_length(word, params));
}

} // namespace lambda_thermo
