#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "lmce/phase.hpp"

using namespace lmce;

namespace {

constexpr double kPi = std::numbers::pi;

SymMatrix random_sym(std::mt19937_64& rng, int n, double lo = -2.0, double hi = 2.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    SymMatrix a(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) a.set(i, j, u(rng));
    return a;
}

}  // namespace

TEST_SUITE("phase") {
    TEST_CASE("operator value on reference matrices") {
        CHECK(F_of(SymMatrix(3)) == doctest::Approx(0.0).epsilon(1e-15));
        for (int n = 2; n <= 8; ++n)
            CHECK(F_of(SymMatrix::identity(n)) == doctest::Approx(n * kPi / 4.0).epsilon(1e-14));
        const double theta = 2.0;
        const SymMatrix iso = SymMatrix::identity(3, a_star(3, theta));
        CHECK(std::fabs(F_of(iso) - theta) < 1e-12);
    }

    TEST_CASE("classification thresholds") {
        CHECK(classify(3, kPi / 2.0).kind == PhaseKind::Critical);
        CHECK(classify(2, 0.3).kind == PhaseKind::Supercritical);
        CHECK(classify(3, 1.4).kind == PhaseKind::Subcritical);
        CHECK_FALSE(classify(3, 1.4).concave_range);
        CHECK(classify(3, 0.99 * 3 * kPi / 2.0).concave_range);
        CHECK(classify(2, kPi / 2.0).concave_range);  // (n-1)*pi/2 boundary included
        CHECK_THROWS_AS(classify(2, kPi), Error);
    }

    TEST_CASE("isotropic coefficient") {
        CHECK(a_star(2, kPi / 2.0) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(a_star(3, 3.0 * std::atan(2.0)) == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(a_star(4, 2.0) == doctest::Approx(std::tan(0.5)).epsilon(1e-15));
    }

    TEST_CASE("decay rate on reference matrices") {
        for (double a : {0.1, 1.0, 7.0})
            for (int n = 2; n <= 8; ++n)
                CHECK(std::fabs(d_of(SymMatrix::identity(n, a)) - n) < 1e-13);
        CHECK(d_of(SymMatrix::diag({1.0, 2.0})) == doctest::Approx(0.9).epsilon(1e-14));
        CHECK(d_of(SymMatrix::identity(4)) == doctest::Approx(4.0).epsilon(1e-14));
        CHECK_THROWS_AS(d_of(SymMatrix::diag({1.0, -1.0})), Error);
    }

    TEST_CASE("perturbed decay rate") {
        CHECK(d_eps(SymMatrix::identity(5, 0.7), 0.0) == doctest::Approx(5.0).epsilon(1e-14));
        CHECK(d_eps(SymMatrix::identity(3, 2.0), 0.1) == doctest::Approx(2.5).epsilon(1e-14));
        CHECK(d_eps(SymMatrix::diag({1.0, 2.0}), 0.0) == doctest::Approx(0.9).epsilon(1e-14));

        // The eps0 term only shrinks the rate.
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(0.2, 3.0);
        for (int rep = 0; rep < 100; ++rep) {
            const int n = 2 + static_cast<int>(rng() % 7);
            VecN lam(n);
            for (int i = 0; i < n; ++i) lam[i] = u(rng);
            const SymMatrix a = SymMatrix::diag(lam);
            double prev = d_eps(a, 0.0);
            CHECK(prev == doctest::Approx(d_of(a)).epsilon(1e-13));
            for (double e : {0.1, 0.3, 0.7, 1.0}) {
                const double cur = d_eps(a, e);
                CHECK(cur <= prev + 1e-13);
                prev = cur;
            }
        }
    }

    TEST_CASE("eps0 selection by bisection") {
        // Isotropic closed form: d_eps(I3, e) = 3/(1+2e); equals 2.1 at
        // e = (3/2.1 - 1)/2.
        const auto got = find_eps0(SymMatrix::identity(3), 0.1);
        REQUIRE(got.has_value());
        CHECK(*got == doctest::Approx((3.0 / 2.1 - 1.0) / 2.0).epsilon(1e-9));
        CHECK(d_eps(SymMatrix::identity(3), *got) >= 2.1);

        CHECK_FALSE(find_eps0(SymMatrix::diag({1.0, 2.0}), 0.05).has_value());
        // d(I2) = 2 sits exactly on the boundary and is excluded.
        CHECK_FALSE(find_eps0(SymMatrix::identity(2), 0.0).has_value());
    }

    TEST_CASE("membership certificate") {
        const auto yes = in_A0(SymMatrix::identity(3, a_star(3, 2.0)));
        CHECK(yes.member);
        CHECK(yes.theta_of_a == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(yes.d_value == doctest::Approx(3.0).epsilon(1e-12));

        const auto no = in_A0(SymMatrix::diag({1.0, 2.0}));
        CHECK_FALSE(no.member);
        CHECK(no.positive_definite);
        CHECK(no.d_value == doctest::Approx(0.9).epsilon(1e-12));

        CHECK_FALSE(in_A0(SymMatrix::diag({-1.0, 1.0, 1.0})).member);
        CHECK_FALSE(in_A0(SymMatrix::diag({-1.0, 1.0, 1.0})).positive_definite);
    }

    TEST_CASE("operator monotonicity, oddness, orthogonal invariance") {
        std::mt19937_64 rng(31);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int rep = 0; rep < 60; ++rep) {
            const int n = 2 + static_cast<int>(rng() % 7);
            const SymMatrix m = random_sym(rng, n);

            // M' = M + P^T P is an upward perturbation.
            MatN p(n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) p.at(i, j) = u(rng);
            SymMatrix mp = m;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j <= i; ++j) {
                    double s = 0.0;
                    for (int k = 0; k < n; ++k) s += p.at(k, i) * p.at(k, j);
                    mp.add(i, j, s);
                }
            CHECK(F_of(mp) >= F_of(m) - 1e-12);

            CHECK(F_of(-1.0 * m) == doctest::Approx(-F_of(m)).epsilon(1e-12));

            // Orthogonal frame from an unrelated eigenproblem.
            const MatN q = eig_sym(random_sym(rng, n)).q;
            SymMatrix rot(n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j <= i; ++j) {
                    double s = 0.0;
                    for (int a = 0; a < n; ++a)
                        for (int b = 0; b < n; ++b) s += q.at(a, i) * m(a, b) * q.at(b, j);
                    rot.set(i, j, s);
                }
            CHECK(std::fabs(F_of(rot) - F_of(m)) < 1e-10);
        }
    }

    TEST_CASE("problem validation") {
        PhaseProblem prob;
        prob.n = 3;
        prob.theta = 2.0;  // supercritical for n=3
        prob.delta = default_delta(3, 2.0);
        prob.beta = 3.0;
        prob.c_f = 0.01;
        CHECK_NOTHROW(prob.validate());
        CHECK(prob.delta > 0.0);
        CHECK(prob.theta - 2.0 * prob.delta > kPi / 2.0);

        PhaseProblem bad = prob;
        bad.delta = 0.0;
        CHECK_THROWS_AS(bad.validate(), Error);
        bad = prob;
        bad.theta = 3.0 * kPi / 2.0;
        CHECK_THROWS_AS(bad.validate(), Error);
        bad = prob;
        bad.beta = -1.0;
        CHECK_THROWS_AS(bad.validate(), Error);
    }
}
