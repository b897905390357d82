#include <cmath>
#include <numbers>

#include "doctest.h"
#include "lmce/envelopes.hpp"
#include "lmce/numerics.hpp"
#include "lmce/phase.hpp"

using namespace lmce;

namespace {

constexpr double kPi = std::numbers::pi;

PhaseProblem make_prob(int n, double theta, double delta, double beta, double c_f) {
    PhaseProblem p;
    p.n = n;
    p.theta = theta;
    p.delta = delta;
    p.beta = beta;
    p.c_f = c_f;
    return p;
}

// atan(1/2) + atan(2) = pi/2, so this spectrum sits exactly on the 3*pi/4
// level set while staying genuinely anisotropic.
const SymMatrix kRef = SymMatrix::diag({0.5, 1.0, 2.0});
const double kRefTheta = std::atan(0.5) + std::atan(1.0) + std::atan(2.0);

// Isotropic A = a*I with eps0 = 0 collapses the shifted equation to a single
// arctan in the first slot; invert it by plain bisection as a cross-check.
double bisect_iso_shift(double a, double h, double target, int n, double lo, double hi) {
    auto f = [&](double x) { return std::atan(a * h + a * x) + (n - 1) * std::atan(a * h) - target; };
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("envelopes") {
    TEST_CASE("reference spectrum sits on the concrete level set") {
        CHECK(kRefTheta == doctest::Approx(3.0 * kPi / 4.0).epsilon(1e-15));
    }

    TEST_CASE("unperturbed envelopes collapse to theta") {
        const EnvelopePair env = make_envelopes(make_prob(3, kRefTheta, 0.1, 3.0, 0.0), kRef);
        for (double r : {1.0, 5.0, 1e3}) {
            CHECK(env.upper(r) == doctest::Approx(kRefTheta).epsilon(1e-15));
            CHECK(env.lower(r) == doctest::Approx(kRefTheta).epsilon(1e-15));
        }
    }

    TEST_CASE("envelope bump formula") {
        // Direct evaluation of the bump: full problem data with unit
        // amplitude is not admissible (it would need delta >= 1).
        EnvelopePair env;
        env.theta = 2.1;
        env.delta = 1.0;
        env.beta = 3.0;
        env.c_amp = 1.0;
        env.sqrt_an = 1.0;
        CHECK(env.upper(10.0) == doctest::Approx(2.1 + 1e-3).epsilon(1e-14));
        CHECK(env.lower(10.0) == doctest::Approx(2.1 - 1e-3).epsilon(1e-14));

        env.sqrt_an = 2.0;  // diag(1, 4)
        // r = 2 reaches the unit ellipsoid: (2/2)^-3 = 1, clipped by delta.
        CHECK(env.upper(2.0) == doctest::Approx(2.1 + 1.0).epsilon(1e-14));
    }

    TEST_CASE("inadmissible data is rejected") {
        // |c_f| a_n^{beta/2} = 0.2 * 2^{3/2} exceeds delta = 0.1.
        const PhaseProblem big = make_prob(3, kRefTheta, 0.1, 3.0, 0.2);
        CHECK_THROWS_AS(make_envelopes(big, kRef), Error);
        try {
            make_envelopes(big, kRef);
        } catch (const Error& e) {
            CHECK(e.code() == Err::UnsupportedPerturbation);
        }

        const PhaseProblem ok = make_prob(3, kRefTheta, 0.1, 3.0, 0.0);
        CHECK_THROWS_AS(make_envelopes(ok, SymMatrix::diag({0.5, 1.0, -2.0})), Error);
        // Off the level set: F(I_3) = 3*pi/4 but theta says otherwise.
        CHECK_THROWS_AS(make_envelopes(make_prob(3, 2.0, 0.1, 3.0, 0.0), SymMatrix::identity(3)),
                        Error);
    }

    TEST_CASE("level roots: isotropic closed form") {
        const double a = 0.7;
        const PhaseProblem prob = make_prob(3, 3.0 * std::atan(a), 0.05, 3.0, 0.05);
        const EnvelopePair env = make_envelopes(prob, SymMatrix::identity(3, a));
        for (double r : {1.0, 2.0, 10.0, 1e3}) {
            CHECK(underline_h(r, env) == doctest::Approx(std::tan(env.upper(r) / 3.0) / a).epsilon(1e-12));
            CHECK(overline_h(r, env) == doctest::Approx(std::tan(env.lower(r) / 3.0) / a).epsilon(1e-12));
        }
    }

    TEST_CASE("level roots: ordering and limits") {
        const PhaseProblem prob = make_prob(3, kRefTheta, 0.1, 3.0, 0.03);
        const EnvelopePair env = make_envelopes(prob, kRef);
        double prev_lo = 1e300;
        double prev_hi = 0.0;
        for (int k = 0; k <= 40; ++k) {
            const double r = std::pow(10.0, 4.0 * k / 40.0);
            const double lo = underline_h(r, env);
            const double hi = overline_h(r, env);
            CHECK(lo > 1.0);
            CHECK(hi < 1.0);
            CHECK(lo <= prev_lo + 1e-9);
            CHECK(hi >= prev_hi - 1e-9);
            prev_lo = lo;
            prev_hi = hi;
        }
        CHECK(underline_h(1e6, env) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(overline_h(1e6, env) == doctest::Approx(1.0).epsilon(1e-10));

        // c_f = 0 pins both roots at 1 for every radius.
        const EnvelopePair flat = make_envelopes(make_prob(3, kRefTheta, 0.1, 3.0, 0.0), kRef);
        CHECK(underline_h(7.0, flat) == 1.0);
        CHECK(overline_h(7.0, flat) == 1.0);
    }

    TEST_CASE("I vanishes exactly on the lower level root") {
        const EnvelopePair env = make_envelopes(make_prob(3, kRefTheta, 0.1, 3.0, 0.03), kRef);
        for (double r : {1.0, 3.0, 50.0}) {
            const double h = underline_h(r, env);
            CHECK(std::fabs(solve_I(r, h, env, 0.3).value) <= 1e-11);
            CHECK(I0(r, h, env, 0.3) == doctest::Approx(0.0).epsilon(1e-11));
            CHECK_THROWS_AS(solve_I(r, h - 1e-6, env, 0.3), Error);
        }
    }

    TEST_CASE("I against one-dimensional bisection (isotropic, eps0 = 0)") {
        const double a = 0.8;
        const double theta = 3.0 * std::atan(a);
        const EnvelopePair env = make_envelopes(make_prob(3, theta, 0.1, 3.0, 0.0), SymMatrix::identity(3, a));
        for (double h : {1.0, 1.2, 2.0, 5.0}) {
            const double got = solve_I(4.0, h, env, 0.0).value;
            const double want = bisect_iso_shift(a, h, theta, 3, -h - 60.0, 0.0);
            CHECK(got == doctest::Approx(want).epsilon(1e-10));
        }
    }

    TEST_CASE("slope of I in h matches the decay exponent") {
        const EnvelopePair env = make_envelopes(make_prob(3, kRefTheta, 0.1, 3.0, 0.0), kRef);
        const double s = 1e-5;
        for (double eps0 : {0.0, 0.3, 1.0}) {
            const double i1 = solve_I(10.0, 1.0 + s, env, eps0).value;
            const double i2 = solve_I(10.0, 1.0 + 2.0 * s, env, eps0).value;
            const double slope = (4.0 * i1 - i2) / (2.0 * s);
            CHECK(slope == doctest::Approx(-d_eps(kRef, eps0)).epsilon(1e-3));
        }
    }

    TEST_CASE("clamp branch of I0") {
        // Isotropic data in dimension 3: with h = 10 the unclamped root dips
        // below -h, so the clamp at -a_1 h / a_n = -h takes over.
        const EnvelopePair env =
            make_envelopes(make_prob(3, 3.0 * kPi / 4.0, 0.1, 3.0, 0.0), SymMatrix::identity(3));
        const double h = 10.0;
        CHECK(solve_I(5.0, h, env, 0.0).value < -h);
        CHECK(I0(5.0, h, env, 0.0) == doctest::Approx(-h).epsilon(1e-15));
    }

    TEST_CASE("J vanishes exactly on the upper level root") {
        const EnvelopePair env = make_envelopes(make_prob(3, kRefTheta, 0.1, 3.0, 0.03), kRef);
        for (double r : {1.0, 3.0, 50.0}) {
            const double h = overline_h(r, env);
            CHECK(std::fabs(solve_J(r, h, env, 0.3).value) <= 1e-11);
            CHECK_THROWS_AS(solve_J(r, h + 1e-6, env, 0.3), Error);
        }
    }

    TEST_CASE("J against one-dimensional bisection (isotropic, eps0 = 0)") {
        const double a = 0.8;
        const double theta = 3.0 * std::atan(a);
        const EnvelopePair env = make_envelopes(make_prob(3, theta, 0.1, 3.0, 0.0), SymMatrix::identity(3, a));
        for (double h : {1.0, 0.8, 0.4}) {
            const double got = solve_J(4.0, h, env, 0.0).value;
            const double want = bisect_iso_shift(a, h, theta, 3, 0.0, 1.0 / a + 60.0);
            CHECK(got == doctest::Approx(want).epsilon(1e-10));
        }
        // At eps0 = 0 the movable slot saturates at pi/2; h = 0.1 leaves the
        // target out of reach.
        CHECK_THROWS_AS(solve_J(4.0, 0.1, env, 0.0), Error);
    }

    TEST_CASE("slope of J in h matches the decay exponent") {
        const EnvelopePair env = make_envelopes(make_prob(3, kRefTheta, 0.1, 3.0, 0.0), kRef);
        const double s = 1e-5;
        for (double eps0 : {0.0, 0.3, 1.0}) {
            const double j1 = solve_J(10.0, 1.0 - s, env, eps0).value;
            const double j2 = solve_J(10.0, 1.0 - 2.0 * s, env, eps0).value;
            const double slope = (-4.0 * j1 + j2) / (2.0 * s);
            CHECK(slope == doctest::Approx(-d_eps(kRef, eps0)).epsilon(1e-3));
        }
    }

    TEST_CASE("root residuals and signs over sampled domain") {
        const EnvelopePair env = make_envelopes(make_prob(3, kRefTheta, 0.1, 3.0, 0.03), kRef);
        const double cap = 10.0 * underline_h(1.0, env);
        for (int k = 0; k < 10000; ++k) {
            const double r = std::pow(1e4, halton(k + 1, 2));
            const double u = halton(k + 1, 3);
            const double h_lo = underline_h(r, env);
            const ImplicitRoot i = solve_I(r, h_lo + u * (cap - h_lo), env, 0.3);
            CHECK(i.value <= 0.0);
            CHECK(std::fabs(i.residual) <= 1e-11);
            const double h_hi = overline_h(r, env);
            const ImplicitRoot j = solve_J(r, 0.05 + u * (h_hi - 0.05), env, 0.3);
            CHECK(j.value >= 0.0);
            CHECK(std::fabs(j.residual) <= 1e-11);
        }
    }

    TEST_CASE("monotonicity of I and J in radius and in h") {
        const EnvelopePair env = make_envelopes(make_prob(3, kRefTheta, 0.1, 3.0, 0.03), kRef);
        const double h_top = underline_h(1.0, env);  // >= underline_h(r) for r >= 1
        const double h_bot = overline_h(1.0, env);   // <= overline_h(r) for r >= 1
        double prev_i = 1.0, prev_j = -1.0;
        for (int k = 0; k <= 40; ++k) {
            const double r = std::pow(10.0, 4.0 * k / 40.0);
            const double iv = solve_I(r, h_top, env, 0.3).value;
            const double jv = solve_J(r, h_bot, env, 0.3).value;
            CHECK(iv <= prev_i + 1e-9);
            CHECK(jv >= prev_j - 1e-9);
            prev_i = iv;
            prev_j = jv;
        }
        prev_i = 1.0;
        prev_j = 1e300;
        const double h_lo3 = underline_h(3.0, env);
        const double h_hi3 = overline_h(3.0, env);
        for (int k = 0; k <= 40; ++k) {
            const double iv = solve_I(3.0, h_lo3 + 0.2 * k, env, 0.3).value;
            const double jv = solve_J(3.0, 0.1 + (h_hi3 - 0.1) * k / 40.0, env, 0.3).value;
            CHECK(iv <= prev_i + 1e-9);
            CHECK(jv <= prev_j + 1e-9);
            prev_i = iv;
            prev_j = jv;
        }
    }

    TEST_CASE("radial root function") {
        PhaseProblem p2 = make_prob(2, kPi / 2.0 + 0.05, 0.05, 3.0, 0.0);
        // theta - delta = pi/2 makes the isotropic slope tan(pi/4) = 1; the
        // arctan complement identity gives I(2) = 1/2 - 2.
        CHECK(radial_I(1.0, p2) == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(radial_I(2.0, p2) == doctest::Approx(-1.5).epsilon(1e-13));
        CHECK_THROWS_AS(radial_I(0.9, p2), Error);

        for (int n : {2, 3, 5}) {
            const PhaseProblem p = make_prob(n, 0.98 * (n - 1) * kPi / 2.0 + 0.2, 0.05, 3.0, 0.0);
            const double s = 1e-5;
            const double slope = (4.0 * radial_I(1.0 + s, p) - radial_I(1.0 + 2.0 * s, p)) / (2.0 * s);
            CHECK(slope == doctest::Approx(-static_cast<double>(n)).epsilon(1e-4));
            double prev = 1.0;
            for (double h3 : {1.0, 1.5, 2.0, 4.0, 8.0}) {
                const double v = radial_I(h3, p);
                CHECK(v <= 0.0);
                CHECK(v < prev + 1e-12);
                prev = v;
            }
        }
    }
}
