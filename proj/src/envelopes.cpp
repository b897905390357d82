#include "lmce/envelopes.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lmce/numerics.hpp"

namespace lmce {

namespace {

constexpr double kRootTol = 1e-12;  // residual target, below the 1e-11 contract

// g_A(h) = sum_i arctan(a_i h); strictly increasing in h.
double g_iso(const VecN& a, double h) {
    double s = 0.0;
    for (int i = 0; i < a.n; ++i) s += std::atan(a[i] * h);
    return s;
}

double g_iso_deriv(const VecN& a, double h) {
    double s = 0.0;
    for (int i = 0; i < a.n; ++i) {
        const double ah = a[i] * h;
        s += a[i] / (1.0 + ah * ah);
    }
    return s;
}

// The perturbed diagonal: first slot a_1 h + a_n X, the rest a_i h + a_i eps0 X.
double g_shift(const VecN& a, double h, double eps0, double x) {
    const int n = a.n;
    double s = std::atan(a[0] * h + a[n - 1] * x);
    for (int i = 1; i < n; ++i) s += std::atan(a[i] * (h + eps0 * x));
    return s;
}

double g_shift_deriv(const VecN& a, double h, double eps0, double x) {
    const int n = a.n;
    const double t0 = a[0] * h + a[n - 1] * x;
    double s = a[n - 1] / (1.0 + t0 * t0);
    for (int i = 1; i < n; ++i) {
        const double ti = a[i] * (h + eps0 * x);
        s += a[i] * eps0 / (1.0 + ti * ti);
    }
    return s;
}

double solve_h_level(const VecN& a, double target, bool from_above) {
    // Solve g_A(h) = target with h on the side of 1 indicated by the caller.
    const double g1 = g_iso(a, 1.0);
    if (from_above) {
        if (target <= g1) return 1.0;
        double hi = 2.0;
        while (g_iso(a, hi) < target) {
            hi *= 2.0;
            if (hi > 1e12) fail(Err::RootNotBracketed, "underline_h: envelope above operator range");
        }
        auto f = [&](double h) { return g_iso(a, h) - target; };
        auto df = [&](double h) { return g_iso_deriv(a, h); };
        return find_root(f, 1.0, hi, g1 - target, g_iso(a, hi) - target, kRootTol, df).value;
    }
    if (target >= g1) return 1.0;
    double lo = 0.5;
    while (g_iso(a, lo) > target) {
        lo *= 0.5;
        if (lo < 1e-12) fail(Err::RootNotBracketed, "overline_h: envelope below operator range");
    }
    auto f = [&](double h) { return g_iso(a, h) - target; };
    auto df = [&](double h) { return g_iso_deriv(a, h); };
    return find_root(f, lo, 1.0, g_iso(a, lo) - target, g1 - target, kRootTol, df).value;
}

}  // namespace

double EnvelopePair::bump(double r) const {
    if (c_amp == 0.0) return 0.0;
    return std::min(delta, c_amp * std::pow(r / sqrt_an, -beta));
}

EnvelopePair make_envelopes(const PhaseProblem& prob, const SymMatrix& a) {
    prob.validate();
    if (a.dim() != prob.n) fail(Err::InvalidInput, "make_envelopes: dimension mismatch");
    const EigenDecomp dec = eig_sym(a);
    for (int i = 0; i < dec.n; ++i)
        if (!(dec.lambda[i] > 0.0)) fail(Err::NotPositiveDefinite, "make_envelopes");

    EnvelopePair env;
    env.theta = prob.theta;
    env.delta = prob.delta;
    env.beta = prob.beta;
    env.c_amp = std::fabs(prob.c_f);
    env.a = dec.lambda;
    env.sqrt_an = std::sqrt(dec.lambda[dec.n - 1]);

    // The quadratic (1/2) x^T A x must solve the unperturbed equation, or the
    // level roots lose their ordering around 1.
    if (std::fabs(g_iso(env.a, 1.0) - prob.theta) > 1e-8)
        fail(Err::InvalidInput, "make_envelopes: A does not lie on the theta level set (F(A) = " +
                                    std::to_string(g_iso(env.a, 1.0)) + ")");

    // Outside the unit A-ellipsoid |x| >= 1/sqrt(a_n), so the perturbation is
    // bounded by |c_f| a_n^(beta/2); beyond delta the envelopes cannot hold.
    if (env.c_amp * std::pow(env.sqrt_an, prob.beta) > prob.delta * (1.0 + 1e-12))
        fail(Err::UnsupportedPerturbation,
             "perturbation amplitude " + std::to_string(prob.c_f) +
                 " exceeds the phase margin on the domain (needs |c_f| a_n^{beta/2} <= delta)");
    return env;
}

double level_of(double h, const EnvelopePair& env) { return g_iso(env.a, h); }

double underline_h(double r, const EnvelopePair& env) {
    return solve_h_level(env.a, env.upper(r), true);
}

double overline_h(double r, const EnvelopePair& env) {
    return solve_h_level(env.a, env.lower(r), false);
}

ImplicitRoot solve_I(double r, double h, const EnvelopePair& env, double eps0) {
    if (eps0 < 0.0) fail(Err::InvalidInput, "solve_I: eps0 must be >= 0");
    const VecN& a = env.a;
    const double target = env.upper(r);
    const double at_zero = g_shift(a, h, eps0, 0.0);
    // g_shift(., 0) = g_A(h) >= f_upper(r) exactly when h >= underline_h(r).
    if (at_zero < target - 1e-11)
        fail(Err::OutOfDomain, "solve_I: h = " + std::to_string(h) + " below underline_h(" +
                                   std::to_string(r) + ")");
    if (at_zero <= target) return {0.0, at_zero - target, 0.0, 0.0};

    // Lower bound from the a-priori estimate min{(1-b)/eps0, a_1(1-b)/a_n}
    // with b = h; the first term is dropped when eps0 = 0.
    const double sag = 1.0 - std::max(h, 1.0);
    double lo = a[0] * sag / a[a.n - 1] - 1.0;
    if (eps0 > 0.0) lo = std::min(lo, sag / eps0 - 1.0);
    double f_lo = g_shift(a, h, eps0, lo) - target;
    int guard = 0;
    while (f_lo >= 0.0) {
        lo *= 2.0;
        f_lo = g_shift(a, h, eps0, lo) - target;
        if (++guard > 60) fail(Err::RootNotBracketed, "solve_I: no sign change below 0");
    }

    auto f = [&](double x) { return g_shift(a, h, eps0, x) - target; };
    auto df = [&](double x) { return g_shift_deriv(a, h, eps0, x); };
    const RootResult root = find_root(f, lo, 0.0, f_lo, at_zero - target, kRootTol, df);
    return {root.value, root.residual, root.lo, root.hi};
}

double I0(double r, double h, const EnvelopePair& env, double eps0) {
    const double clamp = -env.a[0] * h / env.a[env.a.n - 1];
    return std::max(solve_I(r, h, env, eps0).value, clamp);
}

ImplicitRoot solve_J(double r, double h, const EnvelopePair& env, double eps0) {
    if (eps0 < 0.0) fail(Err::InvalidInput, "solve_J: eps0 must be >= 0");
    if (!(h > 0.0)) fail(Err::OutOfDomain, "solve_J: h must be positive");
    const VecN& a = env.a;
    const double target = env.lower(r);
    const double at_zero = g_shift(a, h, eps0, 0.0);
    // g_A(h) <= f_lower(r) exactly when h <= overline_h(r).
    if (at_zero > target + 1e-11)
        fail(Err::OutOfDomain, "solve_J: h = " + std::to_string(h) + " above overline_h(" +
                                   std::to_string(r) + ")");
    if (at_zero >= target) return {0.0, at_zero - target, 0.0, 0.0};

    // With eps0 = 0 only the first slot grows with J, so the reachable
    // supremum is pi/2 plus the frozen tail; below that no root exists.
    if (eps0 == 0.0) {
        double sup = std::numbers::pi / 2.0;
        for (int i = 1; i < a.n; ++i) sup += std::atan(a[i] * h);
        if (sup <= target + 1e-12)
            fail(Err::OutOfDomain,
                 "solve_J: h = " + std::to_string(h) + " unreachable with eps0 = 0");
    }

    double hi = 1.0 - h;  // heuristic start; grown until the sign changes
    if (hi <= 0.0) hi = 0.5;
    double f_hi = g_shift(a, h, eps0, hi) - target;
    int guard = 0;
    while (f_hi <= 0.0) {
        hi *= 2.0;
        f_hi = g_shift(a, h, eps0, hi) - target;
        if (++guard > 60) fail(Err::RootNotBracketed, "solve_J: no sign change above 0");
    }

    auto f = [&](double x) { return g_shift(a, h, eps0, x) - target; };
    auto df = [&](double x) { return g_shift_deriv(a, h, eps0, x); };
    const RootResult root = find_root(f, 0.0, hi, at_zero - target, f_hi, kRootTol, df);
    return {root.value, root.residual, root.lo, root.hi};
}

double radial_I(double h3, const PhaseProblem& prob) {
    if (h3 < 1.0 - 1e-12) fail(Err::OutOfDomain, "radial_I: h3 must be >= 1");
    h3 = std::max(h3, 1.0);
    const double level = prob.theta - prob.delta;
    if (!(level > 0.0 && level < prob.n * std::numbers::pi / 2.0))
        fail(Err::InvalidPhase, "radial_I: theta - delta outside (0, n*pi/2)");
    const double at = std::tan(level / prob.n);
    // arctan(at (h3 + I)) = level - (n-1) arctan(at h3); the right side stays
    // inside (-pi/2, pi/2) for h3 >= 1, so the equation inverts directly.
    const double rest = level - (prob.n - 1) * std::atan(at * h3);
    if (rest <= -std::numbers::pi / 2.0 + 1e-9)
        fail(Err::PhaseEscape, "radial_I: left the principal branch at h3 = " + std::to_string(h3));
    return std::tan(rest) / at - h3;
}

}  // namespace lmce
