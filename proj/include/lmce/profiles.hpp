#pragma once

#include <optional>
#include <vector>

#include "lmce/envelopes.hpp"
#include "lmce/ode.hpp"

namespace lmce {

// Radial profiles h(r) obeying dh/dr = slope(r, h)/r, sampled at the
// integrator's accepted steps together with the running shift
//   V(r) = int_{r0}^r s (h(s) - 1) ds,
// which carries the finite part of w(r) - r^2/2 without cancellation.

enum class Monotone { Decreasing, Increasing, Constant };

const char* monotone_name(Monotone m);

struct RadialProfile {
    std::vector<double> r_grid;        // strictly increasing
    std::vector<double> h_values;      // positive
    std::vector<double> dh_dr;
    std::vector<double> d2h_dr2;       // node curvature, for dense output
    std::vector<double> shift_values;  // V at the nodes, V(r_grid[0]) = 0
    Monotone monotone = Monotone::Constant;
    std::optional<double> tail_exponent;  // p with h - 1 ~ tail_coeff r^{-p}
    std::optional<double> tail_coeff;

    double r0() const { return r_grid.front(); }
    double r_end() const { return r_grid.back(); }

    // Quintic Hermite between nodes (the curvature column keeps the margin
    // sweeps of barrier Hessians below the verification tolerance); the
    // fitted power law beyond r_end; OutOfDomain below r0.
    double h(double r) const;
    double h_prime(double r) const;
    double shift_at(double r) const;

    // int_{r_end}^inf s (h(s) - 1) ds under the tail model. DivergentShift
    // when the fitted exponent is <= 2 (the integral does not converge).
    double shift_remainder() const;
};

struct ProfileDeps {
    EnvelopePair env;
    double eps0 = 0.0;
    double r_max = 1e4;
    OdeOptions ode;
};

// dh1/dr = I0(r, h1)/r, h1(1) = beta1 >= underline_h(1). Decreasing toward 1
// with tail exponent min{d(A, eps0), beta}.
RadialProfile integrate_h1(double beta1, const ProfileDeps& deps);

// dh2/dr = J(r, h2)/r, h2(1) = beta2 in (0, overline_h(1)]. Increasing
// toward 1, same tail exponent.
RadialProfile integrate_h2(double beta2, const ProfileDeps& deps);

// dh3/dr = I(h3)/r, h3(r0) = gamma3 >= 1: the isotropic comparison profile
// at phase theta - delta. The equation is scale covariant, so r0 is a free
// parameter (the barrier assembly uses r0 = sqrt(a~/a_n)); tail exponent n.
RadialProfile integrate_h3(double gamma3, const PhaseProblem& prob, double r0 = 1.0,
                           double r_max = 1e4, const OdeOptions& ode = {});

// Shift totals mu = int_{r0}^inf s (h(s) - 1) ds - r0^2/2. Strictly
// increasing in the initial value; DivergentShift when the tail decays too
// slowly to integrate (rate min{d(A, eps0), beta} <= 2, resp. n = 2).
double mu1(double beta1, const ProfileDeps& deps);
double mu2(double beta2, const ProfileDeps& deps);
double mu3(double gamma3, const PhaseProblem& prob, double r0 = 1.0, double r_max = 1e4,
           const OdeOptions& ode = {});

// Unique beta1 >= underline_h(1) with mu1(beta1) = c, to |mu1 - c| <= 1e-9;
// BelowCStar when c undershoots mu1 at the left end of the range.
double invert_mu1(double c, const ProfileDeps& deps);

// w(r) = alpha + int_{r_from}^r s h(s) ds. Owns a copy of the profile and is
// immutable, so instances can be shared across threads.
class RadialW {
  public:
    // Unit profile h = 1 on [1, 2]: a valid stand-in so aggregates holding a
    // RadialW can be default constructed before assembly fills them in.
    RadialW();
    RadialW(double alpha, RadialProfile profile, double r_from);

    double operator()(double r) const;
    double deriv(double r) const;  // r h(r)
    double r_from() const { return r_from_; }
    const RadialProfile& profile() const { return profile_; }

  private:
    double alpha_ = 0.0;
    double r_from_ = 1.0;
    double v_from_ = 0.0;
    RadialProfile profile_;
};

RadialW build_w(double alpha, const RadialProfile& profile, double r_from);

// lim_{r -> inf} w(r) - r^2/2: the constant term of the quadratic expansion.
// DivergentShift when the profile tail decays too slowly for the limit to
// exist.
double asymptotic_constant(const RadialW& w);

}  // namespace lmce
