#include "cli.hpp"

#include "lambda_thermo/acceptance.hpp"
#include "lambda_thermo/dimension.hpp"
#include "lambda_thermo/measures.hpp"
#include "lambda_thermo/parallel.hpp"
#include "lambda_thermo/serialize.hpp"
#include "lambda_thermo/spectra.hpp"
#include "lambda_thermo/stochastic.hpp"

#include "CLI11.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

namespace lambda_thermo::cli {

namespace {

constexpr const char* kGridHelp =
    "Grids: 'start:stop:step' includes start and excludes stop (a point within "
    "1e-9*|step| of stop counts as stop); 'a,b,c' lists values; a bare number is a "
    "one-point grid.";

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view text)
{
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double x = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
    if (text.empty() || ec != std::errc{} || end != text.data() + text.size() || !std::isfinite(x))
        throw DomainError("not a finite number: '" + std::string(text) + "'");
    return x;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> parts;
    for (std::size_t pos; (pos = s.find(sep)) != std::string_view::npos; s.remove_prefix(pos + 1))
        parts.push_back(s.substr(0, pos));
    parts.push_back(s);
    return parts;
}

std::vector<std::int64_t> parse_int_grid(std::string_view text, std::size_t cap)
{
    std::vector<std::int64_t> out;
    for (double x : parse_grid(text, cap)) {
        if (std::abs(x - std::round(x)) > 1e-9 || std::abs(x) > 9e15)
            throw DomainError("expected integers in grid '" + std::string(text) + "'");
        out.push_back(static_cast<std::int64_t>(std::llround(x)));
    }
    return out;
}

std::string timestamp_utc()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

std::string csv_value(const Json& v)
{
    if (v.is_null()) return "";
    if (v.is_string()) return csv_field(v.get<std::string>());
    if (v.is_number_float()) return format_double(v.get<double>());
    return v.dump();
}

/// Rows of flat objects to CSV; columns from the first row.
std::string rows_to_csv(const Json& rows)
{
    std::ostringstream out;
    if (rows.empty()) return "";
    std::vector<std::string> columns;
    for (const auto& [key, _] : rows.front().items()) columns.push_back(key);
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << csv_field(columns[c]);
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < columns.size(); ++c)
            out << (c ? "," : "") << (row.contains(columns[c]) ? csv_value(row[columns[c]]) : "");
        out << '\n';
    }
    return out.str();
}

struct Outcome {
    Json spec = Json::object();
    Json results = Json::object();
    std::vector<std::string> warnings;
    std::string csv;
    int exit_code = kExitOk;
};

struct Common {
    std::string format = "json";
    std::string output;
    std::size_t max_points = kDefaultGridCap;
    unsigned threads = 0;
};

void add_common(CLI::App* sub, Common& c, bool grid)
{
    sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    sub->add_option("-o,--output", c.output, "Write to this file instead of stdout");
    if (grid) {
        sub->add_option("--max-points", c.max_points, "Cap on the number of grid points")->capture_default_str();
        sub->add_option("--threads", c.threads, "Worker threads (0: LAMBDA_THERMO_THREADS or all cores)")
            ->capture_default_str();
    }
}

void echo_common(Json& spec, const Common& c, bool grid)
{
    spec["format"] = c.format;
    if (grid) spec["max_points"] = c.max_points;
}

std::size_t checked_product(std::size_t a, std::size_t b, std::size_t cap)
{
    if (b != 0 && a > cap / b) throw GridCapExceeded("grid exceeds --max-points " + std::to_string(cap));
    if (a * b > cap)
        throw GridCapExceeded("grid has " + std::to_string(a * b) + " points, above --max-points " +
                              std::to_string(cap));
    return a * b;
}

// --- pressure ----------------------------------------------------------------

struct PressureOpts {
    std::string lambda;
    std::string t_grid = "0:3:0.1";
    std::string k_schedule = "8,32,128,512";
    bool phase_transition = false;
    Common common;
};

Outcome run_pressure(const PressureOpts& o)
{
    const auto lambdas = parse_grid(o.lambda, o.common.max_points);
    const auto ts = parse_grid(o.t_grid, o.common.max_points);
    checked_product(lambdas.size(), ts.size(), o.common.max_points);
    std::vector<std::size_t> ks;
    for (auto k : parse_int_grid(o.k_schedule, 64)) {
        if (k < 1) throw DomainError("K-schedule entries must be positive");
        ks.push_back(static_cast<std::size_t>(k));
    }

    Outcome r;
    r.spec = {{"lambda", o.lambda}, {"t_grid", o.t_grid}, {"k_schedule", ks}, {"phase_transition", o.phase_transition}};
    echo_common(r.spec, o.common, true);

    Json rows = Json::array();
    Json flat = Json::array();
    std::size_t envelope_failures = 0;
    for (double lambda : lambdas) {
        for (const auto& s : pressure_curve(lambda, ts, ks)) {
            Json row = {{"lambda", number(lambda)}};
            row.update(to_json(s, ks));
            rows.push_back(row);
            Json f = {{"lambda", number(lambda)}, {"t", number(s.t)}, {"P_closed", number(s.pressure)}};
            for (std::size_t i = 0; i < ks.size(); ++i) f["x_K" + std::to_string(ks[i])] = number(s.truncated[i]);
            f["envelope_ok"] = s.envelope_ok;
            flat.push_back(std::move(f));
            if (!s.envelope_ok) ++envelope_failures;
        }
    }
    r.results["k_schedule"] = ks;
    r.results["rows"] = std::move(rows);
    if (o.phase_transition) {
        std::vector<Json> reports(lambdas.size());
        parallel_for(
            lambdas.size(), [&](std::size_t i) { reports[i] = to_json(phase_transition_report(lambdas[i])); },
            o.common.threads);
        r.results["phase_transitions"] = reports;
    }
    if (envelope_failures)
        r.warnings.push_back(std::to_string(envelope_failures) + " grid point(s) violate the pressure envelope");
    r.csv = rows_to_csv(flat);
    return r;
}

// --- conformal / invariant ---------------------------------------------------

struct ConformalOpts {
    double lambda = 0.3;
    double t = 1.0;
    std::optional<double> p;
    std::int64_t k_max = 20;
    std::int64_t residual_k = 100;
    Common common;
};

Outcome run_conformal(const ConformalOpts& o)
{
    if (o.k_max < 1 || o.residual_k < 1) throw DomainError("--k-max and --residual-k must be positive");
    const double p_conf = pressure_closed(o.lambda, o.t);
    const double p = o.p.value_or(p_conf);
    const StateMeasure m = conformal_measure(o.lambda, o.t, p);

    Outcome r;
    r.spec = {{"lambda", number(o.lambda)}, {"t", number(o.t)}, {"p", o.p ? number(*o.p) : Json(nullptr)},
              {"k_max", o.k_max}, {"residual_k", o.residual_k}};
    echo_common(r.spec, o.common, false);

    Json masses = Json::array();
    for (State k = 1; k <= o.k_max; ++k) masses.push_back({{"k", k}, {"mass", number(m.mass(k))}});
    const double residual = conformal_residual(m, o.lambda, o.t, p, o.residual_k);
    r.results = {{"lambda", number(o.lambda)},
                 {"t", number(o.t)},
                 {"lambda_t", number(std::pow(o.lambda, o.t))},
                 {"p", number(p)},
                 {"p_conf", number(p_conf)},
                 {"law", to_json(m.law())},
                 {"total_mass", number(m.total())},
                 {"residual", number(residual)},
                 {"masses", masses}};
    if (!(residual < 1e-10)) r.warnings.push_back("conformal residual " + format_double(residual) + " above 1e-10");
    r.csv = rows_to_csv(masses);
    return r;
}

struct InvariantOpts {
    double lambda = 0.3;
    double t = 1.0;
    std::int64_t j_max = 20;
    Common common;
};

Outcome run_invariant(const InvariantOpts& o)
{
    if (o.j_max < 1) throw DomainError("--j-max must be positive");
    const StateMeasure mu = invariant_measure(o.lambda, o.t);
    const auto h = eigenfunction(o.lambda, o.t, o.j_max);
    const VariationalValue v = variational_value(o.lambda, o.t);
    const RhoIntegral rho = rho_integral(o.lambda, o.t);

    Outcome r;
    r.spec = {{"lambda", number(o.lambda)}, {"t", number(o.t)}, {"j_max", o.j_max}};
    echo_common(r.spec, o.common, false);

    Json masses = Json::array();
    for (State j = 1; j <= o.j_max; ++j) {
        masses.push_back({{"j", j},
                          {"mu", number(mu.mass(j))},
                          {"density_ratio", number(density_ratio(j, o.lambda, o.t))},
                          {"h", number(h[static_cast<std::size_t>(j - 1)])}});
    }
    r.results = {{"lambda", number(o.lambda)},
                 {"t", number(o.t)},
                 {"lambda_t", number(std::pow(o.lambda, o.t))},
                 {"law", to_json(mu.law())},
                 {"rho_integral", {{"value", number(rho.value)}, {"divergent", rho.divergent}}},
                 {"stationarity_residual", number(stationarity_residual(o.lambda, o.t, o.j_max))},
                 {"eigenfunction_residual", number(eigenfunction_residual(o.lambda, o.t, o.j_max))},
                 {"variational",
                  {{"entropy", number(v.entropy)},
                   {"integral", number(v.integral)},
                   {"sum", number(v.sum)},
                   {"log_psi", number(v.log_psi)}}},
                 {"masses", masses}};
    r.csv = rows_to_csv(masses);
    return r;
}

// --- classify ----------------------------------------------------------------

struct ClassifyOpts {
    std::string lambda;
    std::string t;
    double boundary_tol = 1e-12;
    Common common;
};

Outcome run_classify(const ClassifyOpts& o)
{
    const auto lambdas = parse_grid(o.lambda, o.common.max_points);
    const auto ts = parse_grid(o.t, o.common.max_points);
    const std::size_t n = checked_product(lambdas.size(), ts.size(), o.common.max_points);
    if (!(o.boundary_tol >= 0.0)) throw DomainError("--boundary-tol must be nonnegative");

    std::vector<Classification> out(n);
    parallel_for(
        n, [&](std::size_t i) { out[i] = classify(lambdas[i / ts.size()], ts[i % ts.size()], o.boundary_tol); },
        o.common.threads);

    Outcome r;
    r.spec = {{"lambda", o.lambda}, {"t", o.t}, {"boundary_tol", number(o.boundary_tol)}};
    echo_common(r.spec, o.common, true);
    Json rows = Json::array();
    Json flat = Json::array();
    for (std::size_t i = 0; i < n; ++i) {
        const double lambda = lambdas[i / ts.size()], t = ts[i % ts.size()];
        Json row = {{"lambda", number(lambda)}, {"t", number(t)}};
        row.update(to_json(out[i]));
        rows.push_back(std::move(row));
        flat.push_back({{"lambda", number(lambda)},
                        {"t", number(t)},
                        {"class", std::string(to_string(out[i].regime))},
                        {"lambda_t", number(out[i].lambda_t)},
                        {"rho_integral", out[i].rho ? number(out[i].rho->value) : Json(nullptr)},
                        {"drift", number(out[i].drift)},
                        {"drift_sign", out[i].drift_sign}});
    }
    r.results["rows"] = std::move(rows);
    r.csv = rows_to_csv(flat);
    return r;
}

// --- simulate ----------------------------------------------------------------

struct SimulateOpts {
    double lambda = 0.5;
    double t = 1.0;
    std::int64_t steps = 1000;
    std::int64_t walkers = 1;
    std::uint64_t seed = 0;
    std::int64_t threshold = 50;
    std::string initial = "1";
    std::string mode = "chain";
    Common common;
};

Outcome run_simulate(const SimulateOpts& o)
{
    WalkConfig cfg;
    cfg.lambda = o.lambda;
    cfg.t = o.t;
    cfg.n_steps = o.steps;
    cfg.n_walkers = o.walkers;
    cfg.seed = o.seed;
    cfg.escape_threshold = o.threshold;
    cfg.threads = o.common.threads;
    if (o.initial == "uniform") cfg.initial_state = std::nullopt;
    else {
        const double x = parse_number(o.initial);
        if (x != std::floor(x) || x < 1 || x > 9e15)
            throw DomainError("--initial must be a positive integer state or 'uniform'");
        cfg.initial_state = static_cast<State>(x);
    }
    validate(cfg);
    const WalkStats s = o.mode == "interval" ? simulate_interval(cfg) : simulate_chain(cfg);

    Outcome r;
    r.spec = {{"lambda", number(o.lambda)}, {"t", number(o.t)},          {"steps", o.steps},
              {"walkers", o.walkers},       {"seed", o.seed},             {"threshold", o.threshold},
              {"initial", o.initial},       {"mode", o.mode}};
    echo_common(r.spec, o.common, false);
    r.results = {{"mode", o.mode}};
    r.results.update(to_json(s));
    if (s.counts.back() != 0)
        r.warnings.push_back("visits above state " + std::to_string(kHistogramCap) + " are pooled in the overflow bin");
    r.csv = to_csv(s);
    return r;
}

// --- dimension ---------------------------------------------------------------

struct DimensionOpts {
    std::string lambda;
    std::string method = "closed_form";
    std::string truncations;
    Common common;
};

Outcome run_dimension(const DimensionOpts& o)
{
    const auto lambdas = parse_grid(o.lambda, o.common.max_points);
    const DimensionMethod method = parse_dimension_method(o.method);
    std::vector<std::size_t> ks;
    if (!o.truncations.empty()) {
        for (auto k : parse_int_grid(o.truncations, 64)) {
            if (k < 2) throw DomainError("--truncated K values must be at least 2");
            ks.push_back(static_cast<std::size_t>(k));
        }
    }
    checked_product(lambdas.size(), std::max<std::size_t>(ks.size(), 1), o.common.max_points);

    std::vector<DimensionReport> reports(lambdas.size());
    std::vector<std::vector<double>> truncated(lambdas.size(), std::vector<double>(ks.size()));
    parallel_for(
        lambdas.size(),
        [&](std::size_t i) {
            reports[i] = dimension_report(lambdas[i], method);
            for (std::size_t j = 0; j < ks.size(); ++j) truncated[i][j] = dim_truncated(lambdas[i], ks[j]);
        },
        o.common.threads);

    Outcome r;
    r.spec = {{"lambda", o.lambda}, {"method", std::string(to_string(method))}, {"truncated", ks}};
    echo_common(r.spec, o.common, true);
    Json rows = Json::array();
    Json flat = Json::array();
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        Json row = to_json(reports[i]);
        Json f = row;
        if (!ks.empty()) {
            Json tr = Json::object();
            for (std::size_t j = 0; j < ks.size(); ++j) {
                tr[std::to_string(ks[j])] = number(truncated[i][j]);
                f["dim_truncated_K" + std::to_string(ks[j])] = number(truncated[i][j]);
            }
            row["dim_truncated"] = std::move(tr);
        }
        rows.push_back(std::move(row));
        flat.push_back(std::move(f));
    }
    r.results["rows"] = std::move(rows);
    r.csv = rows_to_csv(flat);
    return r;
}

// --- partition ---------------------------------------------------------------

struct PartitionOpts {
    std::string kind = "z";
    std::string k = "1:11:1";
    std::int64_t e0 = 1;
    std::string lambda_t;
    std::optional<double> lambda;
    std::optional<double> t;
    std::int64_t n = 10000;
    double trim = 0.0;
    Common common;
};

Outcome run_partition(const PartitionOpts& o)
{
    Outcome r;
    r.spec = {{"kind", o.kind}};
    Json rows = Json::array();

    if (o.kind == "series") {
        if (!o.lambda || !o.t) throw DomainError("partition --kind series needs --lambda and --t");
        r.spec.update({{"lambda", number(*o.lambda)}, {"t", number(*o.t)}, {"n", o.n}, {"trim", number(o.trim)}});
        echo_common(r.spec, o.common, false);
        const RecurrenceSeries s = recurrence_series(*o.lambda, *o.t, o.n, o.trim);
        r.results = to_json(s);
        for (const auto& x : s.samples)
            rows.push_back({{"n", x.n}, {"term", number(x.term)}, {"partial_sum", number(x.partial_sum)}});
        if (s.trimmed) r.warnings.push_back("trimmed: partial sums are lower bounds");
        r.csv = rows_to_csv(rows);
        return r;
    }

    const auto ks = parse_int_grid(o.k, o.common.max_points);
    r.spec["k"] = o.k;
    if (o.kind == "null-column") {
        echo_common(r.spec, o.common, true);
        for (auto k : ks) {
            if (k < 0) throw DomainError("k must be nonnegative");
            const auto col = null_column(k);
            Json entries = Json::array();
            for (const auto& q : col) entries.push_back(to_json(q));
            rows.push_back({{"k", k}, {"column", entries}, {"closed_form_match", col == null_column_closed_form(k)}});
        }
        r.results["rows"] = rows;
        Json flat = Json::array();
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row["column"].size(); ++i)
                flat.push_back({{"k", row["k"]}, {"i", i + 1}, {"value", row["column"][i]}});
        }
        r.csv = rows_to_csv(flat);
        return r;
    }
    if (o.kind != "z" && o.kind != "column-sum") throw DomainError("unknown partition kind '" + o.kind + "'");

    r.spec["e0"] = o.e0;
    if (!o.lambda_t.empty()) {
        const Rational a = parse_rational(o.lambda_t);
        r.spec["lambda_t"] = to_string(a);
        echo_common(r.spec, o.common, true);
        for (auto k : ks) {
            const Rational z =
                o.kind == "z" ? partition_Z_exact(k, o.e0, a) : partition_column_sum_exact(k, o.e0, a);
            rows.push_back({{"k", k}, {"value", to_json(z)}, {"value_float", number(to_double(z))}});
        }
    } else {
        if (o.kind != "z") throw DomainError("--kind column-sum needs an exact --lambda-t");
        if (!o.lambda || !o.t) throw DomainError("partition needs --lambda-t, or --lambda and --t");
        r.spec.update({{"lambda", number(*o.lambda)}, {"t", number(*o.t)}});
        echo_common(r.spec, o.common, true);
        std::vector<double> z(ks.size());
        parallel_for(
            ks.size(), [&](std::size_t i) { z[i] = partition_Z(ks[i], o.e0, *o.lambda, *o.t); }, o.common.threads);
        for (std::size_t i = 0; i < ks.size(); ++i) rows.push_back({{"k", ks[i]}, {"value", number(z[i])}});
    }
    r.results["rows"] = rows;
    r.csv = rows_to_csv(rows);
    return r;
}

// --- verify ------------------------------------------------------------------

struct VerifyOpts {
    std::string suite = "acceptance";
    std::vector<int> criteria;
    Common common;
};

Outcome run_verify(const VerifyOpts& o, std::ostream& err)
{
    std::vector<CriterionResult> results;
    if (o.criteria.empty()) {
        for (int id = 1; id <= kCriterionCount; ++id) {
            for (auto& c : run_criterion(id)) {
                err << format_line(c) << '\n' << std::flush;
                results.push_back(std::move(c));
            }
        }
    } else {
        for (int id : o.criteria) {
            for (auto& c : run_criterion(id)) {
                err << format_line(c) << '\n' << std::flush;
                results.push_back(std::move(c));
            }
        }
    }
    const bool ok = all_passed(results);
    err << (ok ? "acceptance: all criteria passed" : "acceptance: FAILED") << '\n';

    Outcome r;
    r.spec = {{"suite", o.suite}, {"criteria", o.criteria}};
    echo_common(r.spec, o.common, false);
    Json rows = Json::array();
    for (const auto& c : results) rows.push_back(to_json(c));
    r.results = {{"suite", o.suite}, {"all_passed", ok}, {"criteria", rows}};
    r.csv = rows_to_csv(rows);
    r.exit_code = ok ? kExitOk : kExitFailure;
    return r;
}

void emit(const std::string& command, const Common& common, const Outcome& r, std::ostream& out, std::ostream& err)
{
    std::string text;
    if (common.format == "csv") {
        text = r.csv;
        for (const auto& w : r.warnings) err << "warning: " << w << '\n';
    } else {
        Json env;
        env["schema_version"] = kSchemaVersion;
        env["command"] = command;
        env["spec"] = r.spec;
        env["timestamp"] = timestamp_utc();
        env["library_version"] = kLibraryVersion;
        env["results"] = r.results;
        env["warnings"] = r.warnings;
        text = env.dump(2) + "\n";
    }
    if (common.output.empty()) {
        out << text << std::flush;
        return;
    }
    std::ofstream file(common.output, std::ios::binary);
    if (!file) throw DomainError("cannot open output file '" + common.output + "'");
    file << text;
    if (!file.flush()) throw DomainError("failed writing '" + common.output + "'");
}

} // namespace

std::vector<double> parse_grid(std::string_view text, std::size_t cap)
{
    text = trim(text);
    if (text.empty()) throw DomainError("empty grid");
    std::vector<double> out;
    if (text.find(':') != std::string_view::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3) throw DomainError("grid '" + std::string(text) + "' is not start:stop:step");
        const double start = parse_number(parts[0]), stop = parse_number(parts[1]), step = parse_number(parts[2]);
        if (step == 0.0) throw DomainError("grid step must be nonzero");
        const double r = (stop - start) / step - 1e-9;
        if (!(r > 0.0)) throw DomainError("grid '" + std::string(text) + "' is empty");
        const double count = std::floor(r) + 1.0;
        if (count > static_cast<double>(cap))
            throw GridCapExceeded("grid '" + std::string(text) + "' has more than " + std::to_string(cap) + " points");
        const auto n = static_cast<std::size_t>(count);
        out.reserve(n);
        for (std::size_t i = 0; i < n; ++i) out.push_back(start + static_cast<double>(i) * step);
        return out;
    }
    for (auto part : split(text, ',')) out.push_back(parse_number(part));
    if (out.size() > cap)
        throw GridCapExceeded("grid '" + std::string(text) + "' has more than " + std::to_string(cap) + " points");
    return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Thermodynamic formalism of the piecewise linear map F_lambda", "lambda_thermo"};
    app.footer(std::string(kGridHelp) +
               "\nOutput: JSON envelope by default, --format csv for a flat table. Exit codes: 0 ok, "
               "1 acceptance failure, 2 invalid input, 3 non-convergence.");
    app.require_subcommand(1);

    PressureOpts pressure;
    auto* sp = app.add_subcommand("pressure", "Closed-form pressure and truncated eigenvalues over a grid");
    sp->add_option("--lambda", pressure.lambda, "lambda grid")->required();
    sp->add_option("--t-grid,--t", pressure.t_grid, "t grid")->capture_default_str();
    sp->add_option("--k-schedule", pressure.k_schedule, "Truncation sizes, comma separated")->capture_default_str();
    sp->add_flag("--phase-transition", pressure.phase_transition, "Add one-sided derivatives at t0 per lambda");
    add_common(sp, pressure.common, true);

    ConformalOpts conformal;
    auto* sc = app.add_subcommand("conformal", "(t,p)-conformal measure on the states");
    sc->add_option("--lambda", conformal.lambda)->required();
    sc->add_option("--t", conformal.t)->required();
    sc->add_option("--p", conformal.p, "Shift p (default: the pressure)");
    sc->add_option("--k-max", conformal.k_max, "States listed")->capture_default_str();
    sc->add_option("--residual-k", conformal.residual_k, "States checked by the residual")->capture_default_str();
    add_common(sc, conformal.common, false);

    InvariantOpts invariant;
    auto* si = app.add_subcommand("invariant", "Invariant measure, eigenfunction and variational identity");
    si->add_option("--lambda", invariant.lambda)->required();
    si->add_option("--t", invariant.t)->required();
    si->add_option("--j-max", invariant.j_max, "States listed")->capture_default_str();
    add_common(si, invariant.common, false);

    ClassifyOpts cls;
    auto* sk = app.add_subcommand("classify", "Positive/null recurrent or transient, with certificates");
    sk->add_option("--lambda", cls.lambda, "lambda grid")->required();
    sk->add_option("--t", cls.t, "t grid")->required();
    sk->add_option("--boundary-tol", cls.boundary_tol, "|lambda^t - 1/2| counted as null")->capture_default_str();
    add_common(sk, cls.common, true);

    SimulateOpts sim;
    auto* ss = app.add_subcommand("simulate", "Seeded ensemble of walks on the states");
    ss->add_option("--lambda", sim.lambda)->required();
    ss->add_option("--t", sim.t)->capture_default_str();
    ss->add_option("--steps", sim.steps)->capture_default_str();
    ss->add_option("--walkers", sim.walkers)->capture_default_str();
    ss->add_option("--seed", sim.seed)->capture_default_str();
    ss->add_option("--threshold", sim.threshold, "Escape threshold")->capture_default_str();
    ss->add_option("--initial", sim.initial, "Starting state, or 'uniform' for x uniform in (0,1]")
        ->capture_default_str();
    ss->add_option("--mode", sim.mode, "chain: kernel sampling; interval: iterate the map (t = 1)")
        ->check(CLI::IsMember({"chain", "interval"}))
        ->capture_default_str();
    add_common(ss, sim.common, false);
    ss->add_option("--threads", sim.common.threads, "Worker threads (0: LAMBDA_THERMO_THREADS or all cores)");

    DimensionOpts dim;
    auto* sd = app.add_subcommand("dimension", "Hausdorff dimensions of the escaping and hyperbolic sets");
    sd->add_option("--lambda", dim.lambda, "lambda grid")->required();
    sd->add_option("--method", dim.method, "closed_form or root_find")->capture_default_str();
    sd->add_option("--truncated", dim.truncations, "K values for the truncated dimension, comma separated");
    add_common(sd, dim.common, true);

    PartitionOpts part;
    auto* sq = app.add_subcommand("partition", "Local partition functions and the recurrence series");
    sq->add_option("--kind", part.kind, "z, column-sum, null-column or series")
        ->check(CLI::IsMember({"z", "column-sum", "null-column", "series"}))
        ->capture_default_str();
    sq->add_option("--k", part.k, "k grid")->capture_default_str();
    sq->add_option("--e0", part.e0, "Starting state")->capture_default_str();
    sq->add_option("--lambda-t", part.lambda_t, "Exact lambda^t as p/q (exact arithmetic)");
    sq->add_option("--lambda", part.lambda);
    sq->add_option("--t", part.t);
    sq->add_option("--n", part.n, "Series length (kind series)")->capture_default_str();
    sq->add_option("--trim", part.trim, "Series trimming threshold (kind series)")->capture_default_str();
    add_common(sq, part.common, true);

    VerifyOpts verify;
    auto* sv = app.add_subcommand("verify", "Run the acceptance suite");
    sv->add_option("--suite", verify.suite)->check(CLI::IsMember({"acceptance"}))->capture_default_str();
    sv->add_option("--criterion", verify.criteria, "Run only these criteria (repeatable)")
        ->check(CLI::Range(1, kCriterionCount));
    add_common(sv, verify.common, false);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        if (app.get_subcommands().empty()) err << app.help();
        return kExitUsage;
    }

    const std::vector<std::pair<CLI::App*, std::function<Outcome()>>> handlers = {
        {sp, [&] { return run_pressure(pressure); }},
        {sc, [&] { return run_conformal(conformal); }},
        {si, [&] { return run_invariant(invariant); }},
        {sk, [&] { return run_classify(cls); }},
        {ss, [&] { return run_simulate(sim); }},
        {sd, [&] { return run_dimension(dim); }},
        {sq, [&] { return run_partition(part); }},
        {sv, [&] { return run_verify(verify, err); }},
    };
    const std::vector<const Common*> commons = {&pressure.common, &conformal.common, &invariant.common, &cls.common,
                                                &sim.common,      &dim.common,       &part.common,      &verify.common};

    for (std::size_t i = 0; i < handlers.size(); ++i) {
        CLI::App* sub = handlers[i].first;
        if (!sub->parsed()) continue;
        try {
            const Outcome r = handlers[i].second();
            emit(sub->get_name(), *commons[i], r, out, err);
            return r.exit_code;
        } catch (const NonConvergence& e) {
            err << "error: " << e.what() << " (residual " << format_double(e.residual()) << ")\n";
            return kExitNonConvergence;
        } catch (const std::domain_error& e) {
            err << "error: " << e.what() << '\n';
            return kExitUsage;
        } catch (const std::invalid_argument& e) {
            err << "error: " << e.what() << '\n';
            return kExitUsage;
        } catch (const std::out_of_range& e) {
            err << "error: " << e.what() << '\n';
            return kExitUsage;
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return kExitFailure;
        }
    }
    err << app.help();
    return kExitUsage;
}

} // namespace lambda_thermo::cli
