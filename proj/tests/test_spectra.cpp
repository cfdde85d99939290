#include "doctest.h"

#include "lambda_thermo/error.hpp"
#include "lambda_thermo/spectra.hpp"

#include <cmath>
#include <numbers>
#include <random>

#ifdef LAMBDA_THERMO_HAVE_EIGEN
#include <Eigen/Dense>
#endif

using namespace lambda_thermo;

namespace {

double dense_at(const TruncatedOperator& op, std::size_t i, std::size_t j)
{
    return op.dense()[i * op.size() + j];
}

} // namespace

TEST_CASE("build: entry layouts")
{
    const auto A = build(OperatorKind::A, 2, 0.5, 1.0);
    CHECK(dense_at(A, 0, 0) == doctest::Approx(0.5));
    CHECK(dense_at(A, 0, 1) == doctest::Approx(0.25));
    CHECK(dense_at(A, 1, 0) == doctest::Approx(0.5));
    CHECK(dense_at(A, 1, 1) == doctest::Approx(0.25));

    const auto D = build(OperatorKind::D, 6, 0.3, 1.7);
    for (std::size_t j = 0; j < 6; ++j) {
        CHECK(D.entry(0, j) == 0.5);
        CHECK(D.entry(1, j) == 0.25);
        CHECK(D.entry(2, j) == (j == 0 ? 0.0 : 0.25));
    }

    const double lambda = 0.3, t = 1.4;
    const double band = std::pow(lambda * (1 - lambda), t);
    const auto Bh = build(OperatorKind::BHat, 7, lambda, t);
    for (std::size_t i = 0; i < 7; ++i)
        for (std::size_t j = 0; j < 7; ++j) {
            if (j + 1 >= i)
                CHECK(Bh.entry(i, j) == doctest::Approx(band));
            else
                CHECK(Bh.entry(i, j) == 0.0);
        }
}

TEST_CASE("hat kinds are the parent with first row and column removed")
{
    const double lambda = 0.42, t = 0.8;
    const std::size_t K = 6;
    for (auto [hat, parent] : {std::pair{OperatorKind::AHat, OperatorKind::A},
                               std::pair{OperatorKind::BHat, OperatorKind::B}}) {
        const auto h = build(hat, K, lambda, t);
        const auto p = build(parent, K + 1, lambda, t);
        for (std::size_t i = 0; i < K; ++i)
            for (std::size_t j = 0; j < K; ++j)
                CHECK(h.entry(i, j) == doctest::Approx(p.entry(i + 1, j + 1)).epsilon(1e-14));
    }
}

TEST_CASE("structured apply equals dense multiplication")
{
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (auto kind : {OperatorKind::A, OperatorKind::B, OperatorKind::AHat, OperatorKind::BHat,
                      OperatorKind::D}) {
        for (std::size_t K : {1u, 2u, 3u, 17u, 200u}) {
            const auto op = build(kind, K, 0.37, 1.3);
            const auto m = op.dense();
            std::vector<double> v(K);
            for (double& x : v) x = U(gen);
            const auto left = op.apply_left(v);
            const auto right = op.apply_right(v);
            for (std::size_t j = 0; j < K; ++j) {
                double l = 0.0, r = 0.0, scale = 0.0;
                for (std::size_t i = 0; i < K; ++i) {
                    l += v[i] * m[i * K + j];
                    r += m[j * K + i] * v[i];
                    scale += std::abs(m[i * K + j]) + std::abs(m[j * K + i]);
                }
                CHECK(std::abs(left[j] - l) <= 1e-13 * (1 + scale));
                CHECK(std::abs(right[j] - r) <= 1e-13 * (1 + scale));
            }
        }
    }
}

TEST_CASE("char_poly examples")
{
    const double a = 0.3;
    const auto p1 = char_poly_from_ratio(1, a);
    CHECK(p1.coefficients == std::vector<double>{1.0, -1.0});
    const auto p2 = char_poly_from_ratio(2, a);
    REQUIRE(p2.degree() == 2);
    CHECK(p2.coefficients[0] == doctest::Approx(0.0));
    CHECK(p2.coefficients[1] == doctest::Approx(-(a + 1)));
    CHECK(p2.coefficients[2] == doctest::Approx(1.0));
    const auto p3 = char_poly_from_ratio(3, a);
    CHECK(p3.coefficients[0] == doctest::Approx(0.0));
    CHECK(p3.coefficients[1] == doctest::Approx(-a));
    CHECK(p3.coefficients[2] == doctest::Approx(2 * a + 1));
    CHECK(p3.coefficients[3] == doctest::Approx(-1.0));
}

TEST_CASE("exact char_poly: r^{-K} α_K(r) = (-1)^K λ^{Kt} at r = 1/(1-λ^t)")
{
    for (const auto& a : {Rational(1, 3), Rational(2, 5), Rational(5, 7)}) {
        const Rational r = 1 / (1 - a);
        for (unsigned K = 1; K <= 20; ++K) {
            const auto alpha = char_poly_exact(K, a);
            const Rational lhs = alpha(r) / pow(r, K);
            const Rational rhs = (K % 2 ? Rational(-1) : Rational(1)) * pow(a, K);
            CHECK(lhs == rhs);
        }
    }
}

TEST_CASE("exact char_poly equals det(B̃ - sI) by Bareiss")
{
    const Rational a(3, 11);
    for (unsigned K = 1; K <= 8; ++K) {
        const auto alpha = char_poly_exact(K, a);
        for (int s = -2; s <= 3; ++s) {
            auto m = exact_scaled_matrix(OperatorKind::B, K, a);
            for (unsigned i = 0; i < K; ++i) m[i * K + i] -= s;
            CHECK(exact_determinant(std::move(m), K) == alpha(Rational(s)));
        }
    }
}

TEST_CASE("exact determinant oracle on small matrices")
{
    std::vector<Rational> m{Rational(1, 2), Rational(1, 3), Rational(2), Rational(-1, 4)};
    CHECK(exact_determinant(m, 2) == Rational(1, 2) * Rational(-1, 4) - Rational(2, 3));
    // pivoting: leading zero
    std::vector<Rational> p{0, 1, 0, 1, 0, 0, 0, 0, 3};
    CHECK(exact_determinant(p, 3) == Rational(-3));
}

TEST_CASE("char_poly_equal_AB")
{
    for (std::size_t K = 1; K <= 6; ++K) CHECK(char_poly_equal_AB(K, Rational(1, 3)));
    CHECK(char_poly_equal_AB(8, Rational(2, 5)));
    for (double lambda : {0.2, 0.55, 0.9}) CHECK(char_poly_equal_AB(1, lambda, 1.7));
    CHECK(char_poly_equal_AB(7, 0.3, std::numbers::pi / 3));
    CHECK_THROWS_AS(char_poly_equal_AB(13, Rational(1, 3)), DomainError);
    // a perturbed B must be told apart from A
    auto A = exact_scaled_matrix(OperatorKind::A, 4, Rational(1, 3));
    auto B = exact_scaled_matrix(OperatorKind::B, 4, Rational(1, 3));
    B[3] += Rational(1, 100);
    CHECK(exact_determinant(A, 4) != exact_determinant(B, 4));
}

TEST_CASE("hessenberg_char_poly reproduces the three-term recurrence")
{
    const double lambda = 0.3, t = 1.2;
    const double c = std::pow(1 - lambda, t);
    for (std::size_t K : {1u, 2u, 5u, 12u}) {
        auto B = build(OperatorKind::B, K, lambda, t).dense();
        for (double& x : B) x /= c;
        const auto h = hessenberg_char_poly(B, K);
        const auto alpha = char_poly(K, lambda, t);
        for (std::size_t m = 0; m <= K; ++m)
            CHECK(h[m] == doctest::Approx(alpha.coefficients[m]).epsilon(1e-10));
    }
}

TEST_CASE("leading_eigen: small-K closed forms")
{
    for (double lambda : {0.3, 0.5, 0.8})
        for (double t : {0.5, 1.0, 2.0}) {
            const double a = std::pow(lambda, t), c = std::pow(1 - lambda, t);
            const auto x2 = leading_eigen(build(OperatorKind::B, 2, lambda, t)).value;
            const auto x3 = leading_eigen(build(OperatorKind::B, 3, lambda, t)).value;
            const auto x4 = leading_eigen(build(OperatorKind::B, 4, lambda, t)).value;
            CHECK(x2 == doctest::Approx((a + 1) * c).epsilon(1e-12));
            CHECK(x3 == doctest::Approx(c * (2 * a + 1 + std::sqrt(4 * a * a + 1)) / 2).epsilon(1e-12));
            CHECK(x4 == doctest::Approx(c * (3 * a + 1 + std::sqrt(5 * a * a - 2 * a + 1)) / 2)
                            .epsilon(1e-12));
        }
}

TEST_CASE("leading_eigen agrees with independent power iteration")
{
    for (auto kind : {OperatorKind::A, OperatorKind::B, OperatorKind::AHat, OperatorKind::BHat,
                      OperatorKind::D})
        for (std::size_t K : {1u, 2u, 7u, 40u, 128u})
            for (double t : {0.0, 0.6, 1.0, 2.5}) {
                const auto op = build(kind, K, 0.3, t);
                const auto fast = leading_eigen(op);
                const auto slow = power_iteration(op, 1e-13, 5'000'000);
                CHECK(fast.value == doctest::Approx(slow.value).epsilon(1e-11));
                CHECK(fast.residual <= 1e-12);
                CHECK(fast.left_vector[0] == 1.0);
                for (double x : fast.left_vector) CHECK(x > 0.0);
            }
}

TEST_CASE("A and B share the Perron root; their vectors differ by powers of λ^t")
{
    const double lambda = 0.45, t = 1.1, a = std::pow(lambda, t);
    for (std::size_t K : {3u, 16u, 60u}) {
        const auto ra = leading_eigen(build(OperatorKind::A, K, lambda, t));
        const auto rb = leading_eigen(build(OperatorKind::B, K, lambda, t));
        CHECK(ra.value == doctest::Approx(rb.value).epsilon(1e-13));
        for (std::size_t j = 0; j < K; ++j)
            CHECK(ra.left_vector[j] ==
                  doctest::Approx(rb.left_vector[j] * std::pow(a, static_cast<double>(j))).epsilon(1e-8));
    }
}

TEST_CASE("kind-B left vector is nondecreasing with equal last entries")
{
    for (double t : {0.5, 1.0, 3.0}) {
        const auto r = leading_eigen(build(OperatorKind::B, 50, 0.3, t));
        for (std::size_t j = 0; j + 1 < r.left_vector.size(); ++j)
            CHECK(r.left_vector[j] <= r.left_vector[j + 1] * (1 + 1e-12));
    }
}

TEST_CASE("eigvec_recurrence_check")
{
    for (double lambda : {0.3, 0.6})
        for (double t : {0.7, 1.0, 1.5})
            for (std::size_t K : {5u, 8u, 12u}) {
                const auto r = leading_eigen(build(OperatorKind::B, K, lambda, t));
                const auto chk = eigvec_recurrence_check(r, lambda, t);
                CHECK(chk.v2_defect <= 1e-10);
                CHECK(chk.v3_defect <= 1e-10);
                CHECK(chk.tail_defect <= 1e-12);
                CHECK(chk.max_defect <= 1e-8);
            }
}

#ifdef LAMBDA_THERMO_HAVE_EIGEN
TEST_CASE("largest companion root of α_K matches the Perron value")
{
    for (double lambda : {0.3, 0.7})
        for (double t : {0.5, 1.0, 2.0})
            for (std::size_t K = 2; K <= 30; K += 4) {
                const auto alpha = char_poly(K, lambda, t);
                // monic companion of α_K / lead
                Eigen::MatrixXd C = Eigen::MatrixXd::Zero(K, K);
                const double lead = alpha.coefficients[K];
                for (std::size_t i = 1; i < K; ++i) C(i, i - 1) = 1.0;
                for (std::size_t i = 0; i < K; ++i) C(i, K - 1) = -alpha.coefficients[i] / lead;
                const Eigen::VectorXcd ev = C.eigenvalues();
                double best = 0.0;
                for (Eigen::Index k = 0; k < ev.size(); ++k)
                    if (std::abs(ev[k].imag()) < 1e-9) best = std::max(best, ev[k].real());
                // Newton polish evaluating α through the recurrence, which is
                // far better conditioned than the expanded coefficients
                const double a = std::pow(lambda, t);
                for (int it = 0; it < 8; ++it) {
                    double p0 = 1.0, p1 = 1.0 - best, d0 = 0.0, d1 = -1.0;
                    for (std::size_t k = 2; k <= K; ++k) {
                        const double p2 = -best * p1 - best * a * p0;
                        const double d2 = -p1 - best * d1 - a * p0 - best * a * d0;
                        p0 = p1, p1 = p2, d0 = d1, d1 = d2;
                    }
                    if (d1 == 0.0) break;
                    best -= p1 / d1;
                }
                const double x = leading_eigen(build(OperatorKind::B, K, lambda, t)).value;
                CHECK(best * std::pow(1 - lambda, t) == doctest::Approx(x).epsilon(1e-8));
            }
}
#endif

TEST_CASE("truncated values increase in K toward the closed form")
{
    const double lambda = 0.3;
    for (double t : {0.0, 0.4, 1.0, 2.0}) {
        const double limit = std::exp(pressure_closed(lambda, t));
        double prev = 0.0, prev_gap = INFINITY;
        for (std::size_t K = 2; K <= 1024; K *= 2) {
            const double x = perron_root(build(OperatorKind::B, K, lambda, t));
            if (prev_gap > 1e-14) CHECK(x > prev);
            CHECK(x >= prev * (1 - 1e-15));
            CHECK(x <= limit * (1 + 1e-13));
            CHECK(limit - x <= prev_gap + 1e-15);
            prev = x;
            prev_gap = limit - x;
        }
    }
}

TEST_CASE("psi")
{
    for (double lambda : {0.1, 0.5, 0.9}) CHECK(psi(lambda, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(psi(0.5, 2.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK_THROWS_AS(psi(0.5, 0.0), DomainError);
    for (double lambda : {0.2, 0.5, 0.8})
        for (double t = 0.05; t <= 10.0; t += 0.05) {
            CHECK(psi_prime(lambda, t) < 0.0);
            CHECK(psi_second(lambda, t) > 0.0);
        }
    // derivatives against central differences
    const double lambda = 0.35, t = 1.3, h = 1e-5;
    CHECK(psi_prime(lambda, t) ==
          doctest::Approx((psi(lambda, t + h) - psi(lambda, t - h)) / (2 * h)).epsilon(1e-8));
    CHECK(psi_second(lambda, t) ==
          doctest::Approx((psi(lambda, t + h) - 2 * psi(lambda, t) + psi(lambda, t - h)) / (h * h))
              .epsilon(1e-4));
}

TEST_CASE("pressure_closed and t0")
{
    for (double lambda : {0.1, 0.5, 0.9}) CHECK(pressure_closed(lambda, 0.0) == doctest::Approx(std::log(4.0)));
    for (double lambda : {0.1, 0.3, 0.5}) CHECK(std::abs(pressure_closed(lambda, 1.0)) <= 1e-15);
    for (double lambda : {0.2, 0.5, 0.7}) {
        const double t = t0(lambda);
        const double l1 = std::log1p(-lambda);
        const double left = std::log(4.0) + t * (std::log(lambda) + l1);
        const double right = t * l1 - std::log1p(-std::pow(lambda, t));
        CHECK(std::abs(left - right) <= 1e-15);
        CHECK(std::abs(pressure_closed(lambda, t) - std::log(2.0) - t * l1) <= 1e-15);
    }
    CHECK(t0(0.5) == doctest::Approx(1.0));
    CHECK(t0(0.25) == doctest::Approx(0.5));
    CHECK(t0(0.3) == doctest::Approx(0.5757).epsilon(1e-3));
}

TEST_CASE("phase_transition_report")
{
    for (double lambda : {0.2, 0.3, 0.5, 0.7}) {
        const auto rep = phase_transition_report(lambda);
        CHECK(rep.left_first == doctest::Approx(rep.expected_first).epsilon(1e-6));
        CHECK(rep.right_first == doctest::Approx(rep.expected_first).epsilon(1e-6));
        CHECK(std::abs(rep.left_second) <= 1e-4);
        CHECK(std::abs(rep.right_second - rep.expected_right_second) <= 1e-4);
    }
}

TEST_CASE("pressure_curve")
{
    const double lambda = 0.3;
    std::vector<double> grid;
    for (double t = -1.0; t <= 4.0; t += 0.25) grid.push_back(t);
    const std::vector<std::size_t> ks{4, 16, 64, 256};
    const auto curve = pressure_curve(lambda, grid, ks);
    REQUIRE(curve.size() == grid.size());
    for (const auto& s : curve) {
        CHECK(s.envelope_ok);
        for (std::size_t k = 1; k < s.truncated.size(); ++k)
            CHECK(s.truncated[k] >= s.truncated[k - 1] * (1 - 1e-15));
        // strict below ψ until the truncation error reaches rounding level
        if (std::pow(lambda, s.t) < 0.5) {
            for (double x : s.truncated) CHECK(x <= psi(lambda, s.t) * (1 + 1e-15));
            CHECK(s.truncated.front() < psi(lambda, s.t));
        }
    }
}
