#include "doctest.h"

#include "lambda_thermo/core_map.hpp"
#include "lambda_thermo/error.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <functional>
#include <random>

using namespace lambda_thermo;
using HP = boost::multiprecision::cpp_bin_float_50;

namespace {

// brute-force cell lookup in 50 digits
State scan_cell(const HP& x, const HP& lam)
{
    State n = 1;
    HP upper = 1;
    while (!(x > upper * lam && x <= upper)) {
        upper *= lam;
        ++n;
    }
    return n;
}

StatePoint reference_step(const StatePoint& pt, double lambda)
{
    const HP lam = lambda;
    const HP x = pow(lam, pt.state - 1) * (lam + HP(pt.rel) * (1 - lam));
    const HP y = pt.state == 1 ? (x - lam) / (1 - lam) : (x - pow(lam, pt.state)) / (lam * (1 - lam));
    const State n = scan_cell(y, lam);
    const HP lo = pow(lam, n);
    const HP rel = (y - lo) / (pow(lam, n - 1) - lo);
    return {n, static_cast<double>(rel)};
}

} // namespace

TEST_CASE("MapParams rejects lambda outside (0,1)")
{
    CHECK_THROWS_AS(MapParams(0.0), DomainError);
    CHECK_THROWS_AS(MapParams(1.0), DomainError);
    CHECK_THROWS_AS(MapParams(-0.2), DomainError);
    CHECK_NOTHROW(MapParams(0.5));
}

TEST_CASE("partition_index examples")
{
    CHECK(partition_index(0.75, MapParams(0.5)) == 1);
    CHECK(partition_index(0.5, MapParams(0.5)) == 2);
    CHECK(partition_index(0.09, MapParams(0.3)) == 3);
    CHECK(partition_index(1.0, MapParams(0.3)) == 1);
    CHECK_THROWS_AS(partition_index(0.0, MapParams(0.3)), DomainError);
    CHECK_THROWS_AS(partition_index(1.5, MapParams(0.3)), DomainError);
}

TEST_CASE("partition_index agrees with a direct interval scan")
{
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (double lambda : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const MapParams mp(lambda);
        for (int k = 0; k < 10000; ++k) {
            double x = U(gen);
            if (x == 0.0) continue;
            const State n = partition_index(x, mp);
            REQUIRE(n >= 1);
            CHECK(x > std::pow(lambda, static_cast<double>(n)));
            CHECK(x <= std::pow(lambda, static_cast<double>(n - 1)));
        }
    }
}

TEST_CASE("step examples")
{
    const MapParams half(0.5);
    CHECK(step({1, 0.5}, half) == StatePoint{2, 1.0});
    CHECK(step({2, 0.5}, half) == StatePoint{2, 1.0});
    for (double lambda : {0.2, 0.5, 0.8})
        for (State n = 2; n < 12; ++n) CHECK(step({n, 1.0}, MapParams(lambda)) == StatePoint{n - 1, 1.0});
    CHECK_THROWS_AS(step({0, 0.5}, half), DomainError);
    CHECK_THROWS_AS(step({1, 0.0}, half), DomainError);
}

TEST_CASE("step matches the affine formula evaluated in 50 digits")
{
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (double lambda : {0.2, 0.3, 0.45}) {
        const MapParams mp(lambda);
        for (int orbit = 0; orbit < 40; ++orbit) {
            StatePoint pt{1 + static_cast<State>(U(gen) * 4), 1.0 - U(gen)};
            for (int k = 0; k < 60; ++k) {
                const StatePoint got = step(pt, mp);
                const StatePoint want = reference_step(pt, lambda);
                REQUIRE(got.state == want.state);
                CHECK(got.rel == doctest::Approx(want.rel).epsilon(1e-9));
                pt = got;
            }
        }
    }
}

TEST_CASE("itinerary examples and admissibility")
{
    const MapParams half(0.5);
    CHECK(itinerary({1, 1.0}, 3, half) == CylinderWord{1, 1, 1});
    CHECK(itinerary({1, 0.5}, 2, half) == CylinderWord{1, 2});
    CHECK(itinerary({5, 1.0}, 7, MapParams(0.3)) == CylinderWord{5, 4, 3, 2, 1, 1, 1});

    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const auto w = itinerary({1 + static_cast<State>(U(gen) * 6), 1.0 - U(gen)}, 40, MapParams(0.35));
        CHECK(w.admissible());
    }
}

TEST_CASE("log_abs_deriv")
{
    const MapParams half(0.5);
    CHECK(log_abs_deriv(1, half) == doctest::Approx(std::log(2.0)));
    CHECK(log_abs_deriv(7, half) == doctest::Approx(std::log(4.0)));
    for (double lambda : {0.1, 0.6, 0.95}) {
        const MapParams mp(lambda);
        for (State n = 1; n < 6; ++n) {
            CHECK(log_abs_deriv(n, mp) >= std::log(1 / (1 - lambda)) - 1e-15);
            CHECK(log_abs_deriv(n, mp) <= std::log(1 / (lambda * (1 - lambda))) + 1e-15);
        }
    }
    CHECK_THROWS_AS(log_abs_deriv(0, half), DomainError);
}

TEST_CASE("ergodic_sum_phi")
{
    CHECK(ergodic_sum_phi({1}, {1.0, 0.0}, MapParams(0.3)) == doctest::Approx(std::log(0.7)));
    CHECK(ergodic_sum_phi({2, 1}, {1.0, 0.0}, MapParams(0.5)) == doctest::Approx(-std::log(8.0)));
    CHECK(ergodic_sum_phi({4, 3, 5, 9}, {0.0, 0.0}, MapParams(0.5)) == 0.0);
    CHECK_THROWS_AS(ergodic_sum_phi({3, 1}, {1.0, 0.0}, MapParams(0.5)), InadmissibleWord);
}

TEST_CASE("cylinder_length")
{
    const MapParams half(0.5);
    CHECK(cylinder_length({1}, half) == doctest::Approx(0.5));
    CHECK(cylinder_length({1, 1}, half) == doctest::Approx(0.25));
    CHECK_THROWS_AS(cylinder_length({4, 2}, half), InadmissibleWord);
    CHECK_THROWS_AS(cylinder_length(CylinderWord{}, half), InadmissibleWord);
    // long words stay finite in the log domain
    std::vector<State> deep(400, 2);
    CHECK(std::isfinite(log_cylinder_length(CylinderWord(deep), half)));
}

TEST_CASE("cylinders split into their one-symbol extensions")
{
    const double lambda = 0.37;
    const MapParams mp(lambda);
    constexpr State cap = 8;
    std::function<void(std::vector<State>&)> visit = [&](std::vector<State>& w) {
        if (!w.empty()) {
            const CylinderWord word(w);
            const State lo = std::max<State>(1, w.back() - 1);
            double sum = 0.0;
            for (State j = lo; j <= cap; ++j) sum += cylinder_length(word.extended(j), mp);
            // Σ_{j>cap} λ^{j-1}(1-λ) = λ^cap, times the same prefix factor
            sum += cylinder_length(word.extended(cap + 1), mp) / (1 - lambda);
            CHECK(sum == doctest::Approx(cylinder_length(word, mp)).epsilon(1e-12));
        }
        if (w.size() == 6) return;
        for (State e = 1; e <= cap; ++e) {
            if (!w.empty() && e < w.back() - 1) continue;
            if (w.size() >= 3 && (e % 3) != 0) continue;  // thin out the deep levels
            w.push_back(e);
            visit(w);
            w.pop_back();
        }
    };
    std::vector<State> w;
    visit(w);
}

TEST_CASE("n-cylinders partition (0,1]")
{
    const double lambda = 0.3;
    const MapParams mp(lambda);
    constexpr State cap = 40;  // λ^40 is far below rounding
    for (std::size_t n = 1; n <= 3; ++n) {
        double total = 0.0;
        std::function<void(std::vector<State>&)> visit = [&](std::vector<State>& w) {
            if (w.size() == n) {
                total += cylinder_length(CylinderWord(w), mp);
                return;
            }
            const State lo = w.empty() ? 1 : std::max<State>(1, w.back() - 1);
            for (State e = lo; e <= cap; ++e) {
                w.push_back(e);
                visit(w);
                w.pop_back();
            }
        };
        std::vector<State> w;
        visit(w);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("from_real and to_real round trip")
{
    const MapParams mp(0.4);
    for (double x : {1.0, 0.9, 0.4, 0.16, 0.05, 1e-6}) {
        const auto pt = from_real(x, mp);
        CHECK(to_real(pt, mp) == doctest::Approx(x).epsilon(1e-13));
    }
}
