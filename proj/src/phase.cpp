#include "lmce/phase.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace lmce {

namespace {
constexpr double kPi = std::numbers::pi;
}

const char* phase_name(const PhaseClass& c) {
    if (c.concave_range) return "concave-range";
    switch (c.kind) {
        case PhaseKind::Subcritical: return "subcritical";
        case PhaseKind::Critical: return "critical";
        case PhaseKind::Supercritical: return "supercritical";
    }
    return "unknown";
}

double PhaseProblem::f(double rho) const {
    if (c_f == 0.0) return 0.0;
    return c_f * std::pow(rho, -beta);
}

void PhaseProblem::validate() const {
    if (n < 2 || n > kMaxDim)
        fail(Err::InvalidInput, "dimension " + std::to_string(n) + " outside [2, 8]");
    if (!(theta > 0.0 && theta < n * kPi / 2.0))
        fail(Err::InvalidPhase, "theta = " + std::to_string(theta) + " outside (0, n*pi/2)");
    if (!(delta > 0.0)) fail(Err::InvalidPhase, "delta must be positive");
    if (!(theta + delta < n * kPi / 2.0))
        fail(Err::InvalidPhase, "theta + delta exceeds n*pi/2");
    if (!(theta - delta > 0.0)) fail(Err::InvalidPhase, "theta - delta is not positive");
    const PhaseClass cls = classify(n, theta);
    if (cls.kind == PhaseKind::Supercritical && !(theta - 2.0 * delta > (n - 2) * kPi / 2.0))
        fail(Err::InvalidPhase, "supercritical run needs theta - 2*delta above the critical phase");
    if (!(beta > 0.0)) fail(Err::InvalidInput, "beta must be positive");
    if (m < 2) fail(Err::InvalidInput, "smoothness order m must be >= 2");
}

double default_delta(int n, double theta) {
    const double ceil_gap = (n * kPi / 2.0 - theta) / 4.0;
    const PhaseClass cls = classify(n, theta);
    const double floor_gap =
        (cls.kind == PhaseKind::Supercritical) ? (theta - (n - 2) * kPi / 2.0) / 4.0 : theta / 4.0;
    return std::min({0.05, floor_gap, ceil_gap});
}

double F_of(const SymMatrix& m) {
    const EigenDecomp dec = eig_sym(m);
    double s = 0.0;
    for (int i = 0; i < dec.n; ++i) s += std::atan(dec.lambda[i]);
    return s;
}

PhaseClass classify(int n, double theta) {
    if (n < 1 || n > kMaxDim) fail(Err::InvalidInput, "classify: bad dimension");
    if (!(std::fabs(theta) < n * kPi / 2.0))
        fail(Err::InvalidPhase, "|theta| must be below n*pi/2");
    PhaseClass c;
    const double critical = (n - 2) * kPi / 2.0;
    if (theta > critical)
        c.kind = PhaseKind::Supercritical;
    else if (theta == critical)
        c.kind = PhaseKind::Critical;
    else
        c.kind = PhaseKind::Subcritical;
    c.concave_range = (theta >= (n - 1) * kPi / 2.0);
    return c;
}

double a_star(int n, double theta) {
    if (!(theta > 0.0 && theta < n * kPi / 2.0)) fail(Err::InvalidPhase, "a_star: bad theta");
    return std::tan(theta / n);
}

double d_of(const VecN& lam) {
    for (int i = 0; i < lam.n; ++i)
        if (!(lam[i] > 0.0)) fail(Err::NotPositiveDefinite, "d_of");
    const double lo = lam[0];
    const double hi = lam[lam.n - 1];
    double s = 0.0;
    for (int i = 0; i < lam.n; ++i) s += lam[i] / (1.0 + lam[i] * lam[i]);
    return (1.0 + lo * lo) / hi * s;
}

double d_of(const SymMatrix& a) { return d_of(eig_sym(a).lambda); }

double d_eps(const VecN& lam, double eps0) {
    if (!(eps0 >= 0.0)) fail(Err::InvalidInput, "d_eps: eps0 must be >= 0");
    for (int i = 0; i < lam.n; ++i)
        if (!(lam[i] > 0.0)) fail(Err::NotPositiveDefinite, "d_eps");
    double total = 0.0;
    double rest = 0.0;
    for (int i = 0; i < lam.n; ++i) {
        const double w = lam[i] / (1.0 + lam[i] * lam[i]);
        total += w;
        if (i > 0) rest += w;
    }
    const double a1 = lam[0];
    const double an = lam[lam.n - 1];
    return total / (an / (1.0 + a1 * a1) + eps0 * rest);
}

double d_eps(const SymMatrix& a, double eps0) { return d_eps(eig_sym(a).lambda, eps0); }

std::optional<double> find_eps0(const SymMatrix& a, double margin) {
    if (!(margin >= 0.0)) fail(Err::InvalidInput, "find_eps0: margin must be >= 0");
    const VecN lam = eig_sym(a).lambda;
    for (int i = 0; i < lam.n; ++i)
        if (!(lam[i] > 0.0)) return std::nullopt;
    // Strict comparison: the boundary case d(A) = 2 + margin is not
    // admissible (membership in the family needs a genuine gap).
    const double target = 2.0 + margin;
    if (!(d_eps(lam, 0.0) > target)) return std::nullopt;
    if (d_eps(lam, 1.0) >= target) return 1.0;
    // d_eps is strictly decreasing in eps0, so bisect for the crossing and
    // keep the admissible endpoint.
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (d_eps(lam, mid) >= target)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

A0Certificate in_A0(const SymMatrix& a) {
    A0Certificate cert;
    const EigenDecomp dec = eig_sym(a);
    cert.positive_definite = true;
    for (int i = 0; i < dec.n; ++i)
        if (!(dec.lambda[i] > 0.0)) cert.positive_definite = false;
    if (!cert.positive_definite) return cert;
    cert.theta_of_a = F_of(a);
    cert.d_value = d_of(dec.lambda);
    cert.member = cert.d_value > 2.0;
    return cert;
}

}  // namespace lmce
