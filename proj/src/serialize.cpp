#include "lambda_thermo/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace lambda_thermo {

Json number(double x)
{
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

std::string format_double(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Json to_json(const Rational& q) { return to_string(q); }

Json to_json(const TailLaw& law)
{
    Json j;
    j["law"] = law_name(law);
    if (const auto* g = std::get_if<GeometricLaw>(&law)) {
        j["C"] = number(g->C);
        j["gamma"] = number(g->gamma);
    } else if (const auto* p = std::get_if<PolyGeometricLaw>(&law)) {
        j["A"] = number(p->A);
        j["B"] = number(p->B);
        j["gamma"] = number(p->gamma);
    } else {
        const auto& t = std::get<TwoTermLaw>(law);
        j["A_plus"] = number(t.A_plus);
        j["r_plus"] = number(t.r_plus);
        j["A_minus"] = number(t.A_minus);
        j["r_minus"] = number(t.r_minus);
    }
    return j;
}

Json to_json(const WalkStats& s)
{
    Json occupation = Json::array();
    for (std::size_t k = 0; k < kHistogramCap; ++k) {
        if (s.counts[k] == 0) continue;
        const auto state = static_cast<State>(k + 1);
        occupation.push_back({{"state", state}, {"count", s.counts[k]}, {"frequency", number(s.occupation(state))}});
    }
    double rt_mean = 0.0;
    for (auto r : s.return_times) rt_mean += static_cast<double>(r);
    if (!s.return_times.empty()) rt_mean /= static_cast<double>(s.return_times.size());

    Json j;
    j["n_walkers"] = s.n_walkers;
    j["n_steps"] = s.n_steps;
    j["total_visits"] = s.total_visits;
    j["escape_fraction"] = number(s.escape_fraction());
    j["escaped"] = s.escaped;
    j["mean_displacement"] = number(s.mean_displacement);
    j["var_displacement"] = number(s.var_displacement);
    j["max_state"] = s.max_state;
    j["histogram_cap"] = kHistogramCap;
    j["overflow_count"] = s.counts.back();
    j["overflow_fraction"] = number(s.overflow_fraction());
    j["occupation"] = std::move(occupation);
    j["return_times"] = {{"count", s.return_times.size()},
                         {"mean", number(s.return_times.empty() ? std::nan("") : rt_mean)},
                         {"samples", s.return_times}};
    j["precision_refreshes"] = s.precision_refreshes;
    return j;
}

Json to_json(const Classification& c)
{
    Json j;
    j["class"] = std::string(to_string(c.regime));
    j["lambda_t"] = number(c.lambda_t);
    Json cert;
    if (c.rho) cert["rho_integral"] = {{"value", number(c.rho->value)}, {"divergent", c.rho->divergent}};
    else cert["rho_integral"] = nullptr;
    cert["drift"] = {{"state", c.drift_state}, {"value", number(c.drift)}, {"sign", c.drift_sign}};
    j["certificates"] = std::move(cert);
    return j;
}

Json to_json(const DimensionReport& r)
{
    return {{"lambda", number(r.lambda)},
            {"dim_escaping", number(r.dim_escaping)},
            {"dim_hyperbolic", number(r.dim_hyperbolic)},
            {"t1", number(r.t1)},
            {"method", std::string(to_string(r.method))}};
}

Json to_json(const RecurrenceSeries& s)
{
    Json samples = Json::array();
    for (const auto& x : s.samples)
        samples.push_back({{"n", x.n}, {"term", number(x.term)}, {"partial_sum", number(x.partial_sum)}});
    return {{"lambda_t", number(s.lambda_t)},
            {"N", s.N},
            {"last_term", number(s.last_term)},
            {"partial_sum", number(s.partial_sum)},
            {"fitted_exponent", number(s.fitted_exponent)},
            {"verdict", std::string(to_string(s.verdict))},
            {"lower_bound", s.trimmed},
            {"dropped_mass", number(s.dropped_mass)},
            {"support", s.support},
            {"samples", std::move(samples)}};
}

Json to_json(const PressureSample& s, std::span<const std::size_t> k_schedule)
{
    Json x = Json::object();
    for (std::size_t i = 0; i < k_schedule.size() && i < s.truncated.size(); ++i)
        x[std::to_string(k_schedule[i])] = number(s.truncated[i]);
    return {{"t", number(s.t)}, {"P_closed", number(s.pressure)}, {"x", std::move(x)}, {"envelope_ok", s.envelope_ok}};
}

Json to_json(const PhaseTransitionReport& r)
{
    return {{"lambda", number(r.lambda)},
            {"t0", number(r.t0)},
            {"left_first", number(r.left_first)},
            {"right_first", number(r.right_first)},
            {"left_second", number(r.left_second)},
            {"right_second", number(r.right_second)},
            {"expected_first", number(r.expected_first)},
            {"expected_right_second", number(r.expected_right_second)}};
}

Json to_json(const CylinderSum& c)
{
    return {{"log_via_A", number(c.log_via_A)},
            {"log_via_B", number(c.log_via_B)},
            {"rel_diff", number(c.rel_diff)},
            {"pressure_estimate", number(c.pressure_estimate)}};
}

Json to_json(const CriterionResult& r)
{
    return {{"id", r.id},
            {"name", r.name},
            {"status", r.informational ? "info" : (r.passed ? "pass" : "fail")},
            {"detail", r.detail},
            {"seconds", number(r.seconds)}};
}

std::string to_csv(const WalkStats& s)
{
    std::ostringstream out;
    out << "key,value\n";
    out << "n_walkers," << s.n_walkers << '\n';
    out << "n_steps," << s.n_steps << '\n';
    out << "total_visits," << s.total_visits << '\n';
    out << "escape_fraction," << format_double(s.escape_fraction()) << '\n';
    out << "mean_displacement," << format_double(s.mean_displacement) << '\n';
    out << "var_displacement," << format_double(s.var_displacement) << '\n';
    out << "max_state," << s.max_state << '\n';
    out << "return_time_samples," << s.return_times.size() << '\n';
    out << '\n';
    out << "state,count,frequency\n";
    for (std::size_t k = 0; k < kHistogramCap; ++k) {
        if (s.counts[k] == 0) continue;
        const auto state = static_cast<State>(k + 1);
        out << state << ',' << s.counts[k] << ',' << format_double(s.occupation(state)) << '\n';
    }
    if (s.counts.back() != 0)
        out << '>' << kHistogramCap << ',' << s.counts.back() << ',' << format_double(s.overflow_fraction()) << '\n';
    return out.str();
}

} // namespace lambda_thermo
