#pragma once

#include "lmce/linalg.hpp"
#include "lmce/phase.hpp"

namespace lmce {

// Monotone radial envelopes of theta + f and the implicit root functions
// that drive the profile ODEs. All roots are solved with a safeguarded
// Newton iteration on a sign-changing bracket.

struct EnvelopePair {
    double theta = 0.0;
    double delta = 0.0;
    double beta = 3.0;
    double c_amp = 0.0;    // |c_f|
    double sqrt_an = 1.0;  // sqrt of the largest eigenvalue of A
    VecN a;                // eigenvalues of A, ascending

    // Envelope bump min(delta, |c_f| (r/sqrt(a_n))^-beta): on the level set
    // r_A(x) = r the perturbation satisfies |f(x)| <= |c_f| (r/sqrt(a_n))^-beta.
    double bump(double r) const;
    double upper(double r) const { return theta + bump(r); }
    double lower(double r) const { return theta - bump(r); }
};

// Restricted to the radial-power family f = c_f |x|^-beta. Rejects
// amplitudes so large that |f| exceeds delta somewhere outside the unit
// A-ellipsoid (the envelopes could not enclose theta + f there).
EnvelopePair make_envelopes(const PhaseProblem& prob, const SymMatrix& a);

struct ImplicitRoot {
    double value = 0.0;
    double residual = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

// F(hA) = sum_i arctan(a_i h), strictly increasing in h. Comparing it with
// the envelopes tells which side of a level root a state sits on without
// solving for the root itself.
double level_of(double h, const EnvelopePair& env);

// Unique h >= 1 with sum_i arctan(a_i h) = f_upper(r); decreasing in r.
double underline_h(double r, const EnvelopePair& env);
// Unique h <= 1 with sum_i arctan(a_i h) = f_lower(r); increasing in r.
double overline_h(double r, const EnvelopePair& env);

// Root I <= 0 of
//   arctan(a_1 h + a_n I) + sum_{i>=2} arctan(a_i h + a_i eps0 I) = f_upper(r),
// defined for h >= underline_h(r).
ImplicitRoot solve_I(double r, double h, const EnvelopePair& env, double eps0);

// max{ I(r,h), -a_1 h / a_n }: clamped so that the first slot stays >= 0.
double I0(double r, double h, const EnvelopePair& env, double eps0);

// Root J >= 0 of the mirrored equation with target f_lower(r), defined for
// h <= overline_h(r).
ImplicitRoot solve_J(double r, double h, const EnvelopePair& env, double eps0);

// Radial variant: the root I <= 0 of
//   arctan(at h3 + at I) + (n-1) arctan(at h3) = theta - delta,
// at = tan((theta - delta)/n). Defined for h3 >= 1; slope -n at h3 = 1.
double radial_I(double h3, const PhaseProblem& prob);

}  // namespace lmce
