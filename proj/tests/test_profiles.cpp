#include <cmath>
#include <numbers>

#include "doctest.h"
#include "lmce/profiles.hpp"

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

// Mildly anisotropic spectrum with decay rate d comfortably above 2.
const SymMatrix kRef = SymMatrix::diag({0.9, 1.0, 1.1});
const double kRefTheta = std::atan(0.9) + std::atan(1.0) + std::atan(1.1);

ProfileDeps ref_deps(double c_f, double beta = 3.0, double eps0 = 0.0) {
    ProfileDeps deps;
    deps.env = make_envelopes(make_prob(3, kRefTheta, 0.1, beta, c_f), kRef);
    deps.eps0 = eps0;
    return deps;
}

ProfileDeps iso_deps(double c_f, double beta) {
    ProfileDeps deps;
    deps.env = make_envelopes(make_prob(3, 3.0 * kPi / 4.0, 0.1, beta, c_f), SymMatrix::identity(3));
    return deps;
}

}  // namespace

TEST_SUITE("profiles") {
    TEST_CASE("flat data pins every profile at 1") {
        const ProfileDeps deps = ref_deps(0.0);
        for (const RadialProfile& prof : {integrate_h1(1.0, deps), integrate_h2(1.0, deps)}) {
            CHECK(prof.monotone == Monotone::Constant);
            CHECK_FALSE(prof.tail_exponent.has_value());
            for (double h : prof.h_values) CHECK(h == 1.0);
            CHECK(prof.r0() == 1.0);
            CHECK(prof.r_end() == doctest::Approx(1e4).epsilon(1e-12));
        }
        CHECK(mu1(1.0, deps) == -0.5);
        CHECK(mu2(1.0, deps) == -0.5);
    }

    TEST_CASE("subsolution profile: bands, limit, monotonicity") {
        const ProfileDeps deps = ref_deps(0.03);
        const RadialProfile prof = integrate_h1(1.5, deps);
        CHECK(prof.monotone == Monotone::Decreasing);
        for (std::size_t i = 0; i < prof.h_values.size(); ++i) {
            CHECK(prof.h_values[i] >= 1.0 - 1e-9);
            CHECK(prof.h_values[i] <= 1.5 + 1e-9);
        }
        CHECK(prof.h(1.0) == 1.5);
        CHECK(prof.h(1e4) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK_THROWS_AS(integrate_h1(underline_h(1.0, deps.env) - 1e-4, deps), Error);
        CHECK_THROWS_AS(prof.h(0.5), Error);
    }

    TEST_CASE("subsolution tail exponent tracks min of decay rates") {
        // Perturbation-limited: beta = 2.5 below the isotropic rate d = 3.
        const RadialProfile slow = integrate_h1(1.4, iso_deps(0.08, 2.5));
        REQUIRE(slow.tail_exponent.has_value());
        CHECK(*slow.tail_exponent == doctest::Approx(2.5).epsilon(0.05));

        // Matrix-limited: flat data decays at d(A, 0) = d(A).
        const ProfileDeps flat = ref_deps(0.0);
        const RadialProfile byd = integrate_h1(1.5, flat);
        REQUIRE(byd.tail_exponent.has_value());
        CHECK(*byd.tail_exponent == doctest::Approx(d_eps(kRef, 0.0)).epsilon(0.05));

        // eps0 at the admissibility boundary drags the rate down to 2.05.
        const auto eps0 = find_eps0(kRef);
        REQUIRE(eps0.has_value());
        const RadialProfile byeps = integrate_h1(1.5, ref_deps(0.0, 3.0, *eps0));
        REQUIRE(byeps.tail_exponent.has_value());
        CHECK(*byeps.tail_exponent == doctest::Approx(d_eps(kRef, *eps0)).epsilon(0.05));
        CHECK(d_eps(kRef, *eps0) == doctest::Approx(2.05).epsilon(1e-9));
    }

    TEST_CASE("refined integration reproduces the profiles") {
        ProfileDeps fine = ref_deps(0.03);
        fine.ode.abs_tol = 1e-12;
        fine.ode.rel_tol = 1e-11;
        fine.ode.max_step = 0.05;
        const ProfileDeps deps = ref_deps(0.03);

        const RadialProfile a1 = integrate_h1(1.5, deps), b1 = integrate_h1(1.5, fine);
        const RadialProfile a2 = integrate_h2(0.8, deps), b2 = integrate_h2(0.8, fine);
        for (double r : {1.3, 3.0, 10.0, 1e2, 1e3, 9e3}) {
            CHECK(a1.h(r) == doctest::Approx(b1.h(r)).epsilon(1e-8));
            CHECK(a2.h(r) == doctest::Approx(b2.h(r)).epsilon(1e-8));
        }
        const PhaseProblem p3 = make_prob(3, 2.0, 0.1, 3.0, 0.0);
        const RadialProfile a3 = integrate_h3(2.0, p3, 1.0, 100.0);
        OdeOptions tight;
        tight.abs_tol = 1e-12;
        tight.rel_tol = 1e-11;
        tight.max_step = 0.05;
        const RadialProfile b3 = integrate_h3(2.0, p3, 1.0, 100.0, tight);
        for (double r : {1.5, 4.0, 40.0, 95.0})
            CHECK(a3.h(r) == doctest::Approx(b3.h(r)).epsilon(1e-8));
    }

    TEST_CASE("ordering and continuity in the initial value") {
        const ProfileDeps deps = ref_deps(0.03);
        const RadialProfile lo = integrate_h1(1.2, deps);
        const RadialProfile hi = integrate_h1(1.4, deps);
        for (double r : {1.0, 2.0, 10.0, 1e2, 1e3})
            CHECK(hi.h(r) > lo.h(r));

        const double s = 1e-6;
        const RadialProfile bumped = integrate_h1(1.2 + s, deps);
        for (double r : {1.0, 2.0, 10.0, 1e2}) {
            const double dq = (bumped.h(r) - lo.h(r)) / s;
            CHECK(dq > 0.0);
            CHECK(dq <= r * r);
        }
    }

    TEST_CASE("supersolution profile rises to 1 with vanishing r h'") {
        const auto eps0 = find_eps0(kRef);
        REQUIRE(eps0.has_value());
        const ProfileDeps deps = ref_deps(0.03, 3.0, *eps0);
        const RadialProfile prof = integrate_h2(0.8, deps);
        CHECK(prof.monotone == Monotone::Increasing);
        for (double h : prof.h_values) {
            CHECK(h >= 0.8 - 1e-9);
            CHECK(h <= 1.0 + 1e-9);
        }
        CHECK(prof.h(1e4) == doctest::Approx(1.0).epsilon(1e-6));
        REQUIRE(prof.tail_exponent.has_value());
        CHECK(*prof.tail_exponent == doctest::Approx(std::min(d_eps(kRef, *eps0), 3.0)).epsilon(0.05));

        double prev = 1e300;
        for (double r : {10.0, 1e2, 1e3}) {
            const double discrete = (prof.h(1.01 * r) - prof.h(r)) / 0.01;
            CHECK(std::fabs(discrete) < prev);
            prev = std::fabs(discrete);
        }
        CHECK(prev < 1e-4);
        CHECK(std::fabs(1e3 * prof.h_prime(1e3)) < 1e-4);

        CHECK_THROWS_AS(integrate_h2(0.0, deps), Error);
        CHECK_THROWS_AS(integrate_h2(overline_h(1.0, deps.env) + 1e-4, deps), Error);
    }

    TEST_CASE("radial supersolution profile") {
        const PhaseProblem p3 = make_prob(3, 2.0, 0.1, 3.0, 0.0);
        const RadialProfile unit = integrate_h3(1.0, p3, 1.0, 100.0);
        CHECK(unit.monotone == Monotone::Constant);
        for (double h : unit.h_values) CHECK(h == 1.0);

        const RadialProfile prof = integrate_h3(2.0, p3, 1.0, 100.0);
        CHECK(prof.monotone == Monotone::Decreasing);
        for (double h : prof.h_values) CHECK(h > 1.0 - 1e-12);
        REQUIRE(prof.tail_exponent.has_value());
        CHECK(*prof.tail_exponent == doctest::Approx(3.0).epsilon(0.10));

        // The equation only sees r through dr/r, so profiles at different
        // start radii are dilations of each other.
        const RadialProfile half = integrate_h3(2.0, p3, 0.5, 50.0);
        for (double s : {1.0, 4.0, 40.0})
            CHECK(half.h(0.5 * s) == doctest::Approx(prof.h(s)).epsilon(1e-8));

        CHECK_THROWS_AS(integrate_h3(0.9, p3), Error);
    }

    TEST_CASE("radial shift totals") {
        const PhaseProblem p3 = make_prob(3, 2.0, 0.1, 3.0, 0.0);
        CHECK(mu3(1.0, p3, 0.7, 100.0) == -0.5 * 0.7 * 0.7);
        CHECK(mu3(2.0, p3, 0.5, 50.0) ==
              doctest::Approx(0.25 * mu3(2.0, p3, 1.0, 100.0)).epsilon(1e-5));
        CHECK(mu3(2.5, p3, 1.0, 100.0) > mu3(2.0, p3, 1.0, 100.0));
        CHECK(mu3(2.0, p3, 1.0, 100.0) > mu3(1.5, p3, 1.0, 100.0));

        // In the plane the tail decays exactly at the critical rate 2.
        const PhaseProblem p2 = make_prob(2, kPi / 2.0 + 0.2, 0.05, 3.0, 0.0);
        CHECK_THROWS_AS(mu3(1.5, p2, 1.0, 100.0), Error);
        try {
            mu3(1.5, p2, 1.0, 100.0);
        } catch (const Error& e) {
            CHECK(e.code() == Err::DivergentShift);
        }
    }

    TEST_CASE("shift totals: monotone, consistent under domain doubling") {
        ProfileDeps deps = iso_deps(0.08, 4.0);
        CHECK(mu1(1.2, deps) < mu1(1.3, deps));
        CHECK(mu1(1.3, deps) < mu1(1.45, deps));

        const double at_1e4 = mu1(1.3, deps);
        ProfileDeps wide = deps;
        wide.r_max = 2e4;
        CHECK(at_1e4 == doctest::Approx(mu1(1.3, wide)).epsilon(1e-6));

        CHECK(mu2(0.8, deps) < -0.5);  // integrand is negative
    }

    TEST_CASE("divergent shift is refused") {
        // atan(1/2) + atan(2) = pi/2 keeps this spectrum on a level set, but
        // its decay rate 0.8125 is far below 2.
        ProfileDeps deps;
        deps.env = make_envelopes(make_prob(3, 3.0 * kPi / 4.0, 0.1, 3.0, 0.0),
                                  SymMatrix::diag({0.5, 1.0, 2.0}));
        CHECK_THROWS_AS(mu1(1.3, deps), Error);
        try {
            mu1(1.3, deps);
        } catch (const Error& e) {
            CHECK(e.code() == Err::DivergentShift);
        }
    }

    TEST_CASE("shift inversion") {
        const ProfileDeps deps = ref_deps(0.03);
        const double c = mu1(1.35, deps);
        const double beta = invert_mu1(c, deps);
        CHECK(beta == doctest::Approx(1.35).epsilon(1e-7));
        CHECK(std::fabs(mu1(beta, deps) - c) <= 1e-8);
        CHECK(invert_mu1(c + 0.25, deps) > beta);

        const double bottom = mu1(underline_h(1.0, deps.env), deps);
        CHECK_THROWS_AS(invert_mu1(bottom - 0.1, deps), Error);
        try {
            invert_mu1(bottom - 0.1, deps);
        } catch (const Error& e) {
            CHECK(e.code() == Err::BelowCStar);
        }
    }

    TEST_CASE("radial ansatz from a profile") {
        const ProfileDeps flat = ref_deps(0.0);
        const RadialW one = build_w(0.0, integrate_h1(1.0, flat), 1.0);
        for (double r : {1.0, 2.0, 50.0, 2e4})
            CHECK(one(r) == doctest::Approx(0.5 * (r * r - 1.0)).epsilon(1e-14));

        const ProfileDeps deps = ref_deps(0.03);
        const RadialProfile prof = integrate_h1(1.4, deps);
        const double alpha = 0.7;
        const RadialW w = build_w(alpha, prof, 1.0);
        CHECK(w(1.0) == alpha);
        for (std::size_t i = 0; i < prof.r_grid.size(); i += 7) {
            const double r = prof.r_grid[i];
            CHECK(w.deriv(r) / r == doctest::Approx(prof.h_values[i]).epsilon(1e-9));
        }
        for (double r : {1.5, 7.0, 3e3}) {
            const double s = 1e-4 * r;
            const double fd = (w(r + s) - w(r - s)) / (2.0 * s);
            CHECK(fd == doctest::Approx(w.deriv(r)).epsilon(1e-6));
        }

        // w - r^2/2 approaches alpha + mu1 at the profile's tail rate.
        const double target = alpha + mu1(1.4, deps);
        double prev = 1e300;
        for (double r : {1e4, 1e5, 1e6}) {
            const double gap = std::fabs(w(r) - 0.5 * r * r - target);
            CHECK(gap < prev);
            prev = gap;
        }
        CHECK(prev < 1e-2);
        CHECK_THROWS_AS(w(0.5), Error);
    }
}
