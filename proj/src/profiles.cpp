#include "lmce/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "lmce/numerics.hpp"

namespace lmce {

namespace {

constexpr double kBandSlack = 1e-9;    // tolerance on the hard profile bands
constexpr double kNoiseFloor = 1e-13;  // |h - 1| below this is integrator noise
constexpr double kSegmentBreak = 10.0; // switch to t = ln r past 10 r0

using Slope = std::function<double(double r, double h)>;

struct Band {
    double lo;
    double hi;
};

// Two-segment driver: plain r up to the break radius, then t = ln r so that
// power-law tails become exponentials and the step size stays proportional
// to the decade. State is [h, V].
RadialProfile integrate_core(const Slope& slope, double h0, double r0, double r_max,
                             const Band& veto, const OdeOptions& user) {
    RadialProfile prof;
    // Directional difference of the slope along the solution curve; slope
    // returns dh/dln r, so h'' = (d/dr)[slope/r] along h(r).
    auto curvature = [&](double r, double h, double dhdr) {
        const double e = 1e-4 * r;
        const double sp = slope(r + e, h + e * dhdr);
        const double sm = slope(r - e, h - e * dhdr);
        return (sp - sm) / (2.0 * e * r) - dhdr / r;
    };
    auto push = [&](double r, double h, double dh, double v) {
        if (!prof.r_grid.empty() && r <= prof.r_grid.back()) return;
        prof.r_grid.push_back(r);
        prof.h_values.push_back(h);
        prof.dh_dr.push_back(dh);
        prof.d2h_dr2.push_back(curvature(r, h, dh));
        prof.shift_values.push_back(v);
    };

    const double rb = std::min(r_max, kSegmentBreak * r0);
    OdeState y{};
    y[0] = h0;

    {
        OdeOptions opt = user;
        const double cap = 0.1 * r0;
        opt.max_step = opt.max_step > 0.0 ? std::min(opt.max_step, cap) : cap;
        auto rhs = [&](double r, const OdeState& s, OdeState& d) -> bool {
            if (!(s[0] > veto.lo && s[0] < veto.hi)) return false;
            d[0] = slope(r, s[0]) / r;
            d[1] = r * (s[0] - 1.0);
            return true;
        };
        const auto nodes = integrate_ode(rhs, 2, r0, rb, y, opt);
        for (const auto& nd : nodes) push(nd.t, nd.y[0], nd.dy[0], nd.y[1]);
        y = nodes.back().y;
    }

    if (rb < r_max) {
        OdeOptions opt = user;
        opt.max_step = opt.max_step > 0.0 ? std::min(opt.max_step, 0.05) : 0.05;
        auto rhs = [&](double t, const OdeState& s, OdeState& d) -> bool {
            if (!(s[0] > veto.lo && s[0] < veto.hi)) return false;
            const double r = std::exp(t);
            d[0] = slope(r, s[0]);
            d[1] = r * r * (s[0] - 1.0);
            return true;
        };
        // Step through a fixed ladder of t values and record only the rungs:
        // the node abscissae are then independent of the initial data, so
        // everything fitted on them (tail exponent, shift correction) moves
        // smoothly with that data instead of inheriting step-placement
        // jitter from the controller.
        const double t0 = std::log(rb), t1 = std::log(r_max);
        const int rungs = std::max(1, static_cast<int>(std::ceil((t1 - t0) / 0.05)));
        double t_prev = t0;
        for (int k = 1; k <= rungs; ++k) {
            const double t_next = t0 + (t1 - t0) * k / rungs;
            const auto nodes = integrate_ode(rhs, 2, t_prev, t_next, y, opt);
            const OdeNode& nd = nodes.back();
            const double r = std::exp(nd.t);
            push(r, nd.y[0], nd.dy[0] / r, nd.y[1]);
            y = nd.y;
            t_prev = t_next;
        }
    }
    return prof;
}

// Monotonicity flag and the power-law tail fitted over the last decade.
void finish_profile(RadialProfile& prof) {
    bool up = false, down = false;
    for (std::size_t i = 1; i < prof.h_values.size(); ++i) {
        const double d = prof.h_values[i] - prof.h_values[i - 1];
        up = up || d > kBandSlack;
        down = down || d < -kBandSlack;
    }
    if (up && down) fail(Err::Indeterminate, "profile is not monotone");
    prof.monotone = up ? Monotone::Increasing : down ? Monotone::Decreasing : Monotone::Constant;

    std::vector<double> xs, ys;
    int sign_sum = 0;
    for (std::size_t i = 0; i < prof.r_grid.size(); ++i) {
        if (prof.r_grid[i] < prof.r_end() / 10.0) continue;
        const double dev = prof.h_values[i] - 1.0;
        if (std::fabs(dev) <= kNoiseFloor) continue;
        xs.push_back(std::log(prof.r_grid[i]));
        ys.push_back(std::log(std::fabs(dev)));
        sign_sum += dev > 0.0 ? 1 : -1;
    }
    if (xs.size() < 5 || std::abs(sign_sum) != static_cast<int>(xs.size())) return;

    const LineFit fit = fit_line(xs, ys);
    prof.tail_exponent = -fit.slope;
    prof.tail_coeff = (sign_sum > 0 ? 1.0 : -1.0) * std::exp(fit.intercept);

    const double end_dev = std::fabs(prof.h_values.back() - 1.0);
    const double model = std::fabs(*prof.tail_coeff) * std::pow(prof.r_end(), -*prof.tail_exponent);
    if (end_dev > 2.0 * model)
        fail(Err::FitDegenerate, "profile tail is not a power law (endpoint deviation " +
                                     std::to_string(end_dev) + " vs model " + std::to_string(model) + ")");
}

void check_band(const RadialProfile& prof, double lo, double hi, const char* who) {
    for (std::size_t i = 0; i < prof.h_values.size(); ++i)
        if (prof.h_values[i] < lo - kBandSlack || prof.h_values[i] > hi + kBandSlack)
            fail(Err::PhaseEscape, std::string(who) + ": profile left [" + std::to_string(lo) +
                                       ", " + std::to_string(hi) + "] at r = " +
                                       std::to_string(prof.r_grid[i]));
}

std::size_t locate(const std::vector<double>& xs, double x) {
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t i = static_cast<std::size_t>(it - xs.begin());
    if (i > 0) --i;
    return std::min(i, xs.size() - 2);
}

double hermite(double x, double x0, double x1, double y0, double y1, double d0, double d1) {
    const double w = x1 - x0;
    const double s = (x - x0) / w;
    const double s2 = s * s, s3 = s2 * s;
    return (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * w * d0 +
           (3.0 * s2 - 2.0 * s3) * y1 + (s3 - s2) * w * d1;
}

double hermite_deriv(double x, double x0, double x1, double y0, double y1, double d0, double d1) {
    const double w = x1 - x0;
    const double s = (x - x0) / w;
    const double s2 = s * s;
    return ((6.0 * s2 - 6.0 * s) * y0 + (3.0 * s2 - 4.0 * s + 1.0) * w * d0 +
            (6.0 * s - 6.0 * s2) * y1 + (3.0 * s2 - 2.0 * s) * w * d1) /
           w;
}

// Quintic Hermite matching value, slope and curvature at both ends.
double quintic(double x, double x0, double x1, double y0, double y1, double d0, double d1,
               double c0, double c1) {
    const double w = x1 - x0;
    const double s = (x - x0) / w;
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    const double a0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
    const double a1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    const double a2 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5);
    const double b0 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
    const double b1 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
    const double b2 = 0.5 * (s3 - 2.0 * s4 + s5);
    return a0 * y0 + a1 * w * d0 + a2 * w * w * c0 + b0 * y1 + b1 * w * d1 + b2 * w * w * c1;
}

double quintic_deriv(double x, double x0, double x1, double y0, double y1, double d0, double d1,
                     double c0, double c1) {
    const double w = x1 - x0;
    const double s = (x - x0) / w;
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
    const double a0 = -30.0 * s2 + 60.0 * s3 - 30.0 * s4;
    const double a1 = 1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4;
    const double a2 = 0.5 * (2.0 * s - 9.0 * s2 + 12.0 * s3 - 5.0 * s4);
    const double b0 = 30.0 * s2 - 60.0 * s3 + 30.0 * s4;
    const double b1 = -12.0 * s2 + 28.0 * s3 - 15.0 * s4;
    const double b2 = 0.5 * (3.0 * s2 - 8.0 * s3 + 5.0 * s4);
    return (a0 * y0 + a1 * w * d0 + a2 * w * w * c0 + b0 * y1 + b1 * w * d1 + b2 * w * w * c1) /
           w;
}

double total_shift(const RadialProfile& prof) {
    return prof.shift_values.back() + prof.shift_remainder();
}

}  // namespace

const char* monotone_name(Monotone m) {
    switch (m) {
        case Monotone::Decreasing: return "decreasing";
        case Monotone::Increasing: return "increasing";
        case Monotone::Constant: return "constant";
    }
    return "?";
}

double RadialProfile::h(double r) const {
    if (r < r_grid.front() * (1.0 - 1e-12))
        fail(Err::OutOfDomain, "profile evaluated at r = " + std::to_string(r) +
                                   " below its start " + std::to_string(r_grid.front()));
    if (r <= r_grid.front()) return h_values.front();
    if (r >= r_grid.back()) {
        if (!tail_exponent) return h_values.back();
        return 1.0 + *tail_coeff * std::pow(r, -*tail_exponent);
    }
    const std::size_t i = locate(r_grid, r);
    if (d2h_dr2.size() == r_grid.size())
        return quintic(r, r_grid[i], r_grid[i + 1], h_values[i], h_values[i + 1], dh_dr[i],
                       dh_dr[i + 1], d2h_dr2[i], d2h_dr2[i + 1]);
    return hermite(r, r_grid[i], r_grid[i + 1], h_values[i], h_values[i + 1], dh_dr[i],
                   dh_dr[i + 1]);
}

double RadialProfile::h_prime(double r) const {
    if (r < r_grid.front() * (1.0 - 1e-12))
        fail(Err::OutOfDomain, "profile slope requested below its start");
    if (r <= r_grid.front()) return dh_dr.front();
    if (r >= r_grid.back()) {
        if (!tail_exponent) return 0.0;
        return -*tail_exponent * *tail_coeff * std::pow(r, -*tail_exponent - 1.0);
    }
    const std::size_t i = locate(r_grid, r);
    if (d2h_dr2.size() == r_grid.size())
        return quintic_deriv(r, r_grid[i], r_grid[i + 1], h_values[i], h_values[i + 1], dh_dr[i],
                             dh_dr[i + 1], d2h_dr2[i], d2h_dr2[i + 1]);
    return hermite_deriv(r, r_grid[i], r_grid[i + 1], h_values[i], h_values[i + 1], dh_dr[i],
                         dh_dr[i + 1]);
}

double RadialProfile::shift_at(double r) const {
    if (r < r_grid.front() * (1.0 - 1e-12))
        fail(Err::OutOfDomain, "shift requested below the profile start");
    if (r <= r_grid.front()) return 0.0;
    if (r >= r_grid.back()) {
        const double v_end = shift_values.back();
        if (!tail_exponent) return v_end;
        const double p = *tail_exponent;
        const double re = r_grid.back();
        if (std::fabs(p - 2.0) < 1e-12) return v_end + *tail_coeff * std::log(r / re);
        return v_end + *tail_coeff * (std::pow(r, 2.0 - p) - std::pow(re, 2.0 - p)) / (2.0 - p);
    }
    const std::size_t i = locate(r_grid, r);
    const double d0 = r_grid[i] * (h_values[i] - 1.0);
    const double d1 = r_grid[i + 1] * (h_values[i + 1] - 1.0);
    return hermite(r, r_grid[i], r_grid[i + 1], shift_values[i], shift_values[i + 1], d0, d1);
}

double RadialProfile::shift_remainder() const {
    if (!tail_exponent) return 0.0;
    const double p = *tail_exponent;
    if (p <= 2.0)
        fail(Err::DivergentShift, "tail exponent " + std::to_string(p) +
                                      " <= 2: the shift integral does not converge");
    return *tail_coeff * std::pow(r_grid.back(), 2.0 - p) / (p - 2.0);
}

RadialProfile integrate_h1(double beta1, const ProfileDeps& deps) {
    const EnvelopePair& env = deps.env;
    const double hl1 = underline_h(1.0, env);
    if (beta1 < hl1 - 1e-12)
        fail(Err::OutOfDomain, "integrate_h1: beta1 = " + std::to_string(beta1) +
                                   " is below underline_h(1) = " + std::to_string(hl1));
    const double b1 = std::max(beta1, hl1);
    const double eps0 = deps.eps0;
    auto slope = [&env, eps0](double r, double h) {
        // At or below the level root the defining equation has no negative
        // branch; the profile rides the boundary with zero slope.
        if (level_of(h, env) <= env.upper(r)) return 0.0;
        return I0(r, h, env, eps0);
    };
    RadialProfile prof = integrate_core(slope, b1, 1.0, deps.r_max, {0.5, b1 + 0.5}, deps.ode);
    for (std::size_t i = 0; i < prof.r_grid.size(); ++i) {
        const double floor_h = std::max(1.0, underline_h(prof.r_grid[i], env));
        if (prof.h_values[i] < floor_h - kBandSlack || prof.h_values[i] > b1 + kBandSlack)
            fail(Err::PhaseEscape, "integrate_h1: left [underline_h, beta1] at r = " +
                                       std::to_string(prof.r_grid[i]));
    }
    finish_profile(prof);
    return prof;
}

RadialProfile integrate_h2(double beta2, const ProfileDeps& deps) {
    const EnvelopePair& env = deps.env;
    const double hb1 = overline_h(1.0, env);
    if (!(beta2 > 0.0) || beta2 > hb1 + 1e-12)
        fail(Err::OutOfDomain, "integrate_h2: beta2 = " + std::to_string(beta2) +
                                   " outside (0, overline_h(1) = " + std::to_string(hb1) + "]");
    const double b2 = std::min(beta2, hb1);
    const double eps0 = deps.eps0;
    auto slope = [&env, eps0](double r, double h) {
        if (level_of(h, env) >= env.lower(r)) return 0.0;
        return solve_J(r, h, env, eps0).value;
    };
    RadialProfile prof = integrate_core(slope, b2, 1.0, deps.r_max, {0.5 * b2, 1.5}, deps.ode);
    check_band(prof, b2, 1.0, "integrate_h2");
    finish_profile(prof);
    return prof;
}

RadialProfile integrate_h3(double gamma3, const PhaseProblem& prob, double r0, double r_max,
                           const OdeOptions& ode) {
    prob.validate();
    if (gamma3 < 1.0 - 1e-12)
        fail(Err::OutOfDomain, "integrate_h3: gamma3 = " + std::to_string(gamma3) + " < 1");
    if (!(r0 > 0.0) || !(r_max > r0))
        fail(Err::InvalidInput, "integrate_h3: need 0 < r0 < r_max");
    const double g3 = std::max(gamma3, 1.0);
    auto slope = [&prob](double, double h) { return h <= 1.0 ? 0.0 : radial_I(h, prob); };
    RadialProfile prof = integrate_core(slope, g3, r0, r_max, {0.5, g3 + 0.5}, ode);
    check_band(prof, 1.0, g3, "integrate_h3");
    finish_profile(prof);
    return prof;
}

namespace {

double mu_total(const RadialProfile& prof, double analytic_rate, const char* who) {
    const double base = -0.5 * prof.r0() * prof.r0();
    // No measurable deviation from 1 anywhere: the shift is already complete.
    if (!prof.tail_exponent) return prof.shift_values.back() + base;
    if (analytic_rate <= 2.0)
        fail(Err::DivergentShift, std::string(who) + ": decay rate " +
                                      std::to_string(analytic_rate) +
                                      " <= 2, the shift integral diverges");
    return total_shift(prof) + base;
}

}  // namespace

double mu1(double beta1, const ProfileDeps& deps) {
    const RadialProfile prof = integrate_h1(beta1, deps);
    const double d = d_eps(deps.env.a, deps.eps0);
    return mu_total(prof, deps.env.c_amp > 0.0 ? std::min(d, deps.env.beta) : d, "mu1");
}

double mu2(double beta2, const ProfileDeps& deps) {
    const RadialProfile prof = integrate_h2(beta2, deps);
    const double d = d_eps(deps.env.a, deps.eps0);
    return mu_total(prof, deps.env.c_amp > 0.0 ? std::min(d, deps.env.beta) : d, "mu2");
}

double mu3(double gamma3, const PhaseProblem& prob, double r0, double r_max,
           const OdeOptions& ode) {
    // The autonomous linearization rate is exactly n, so n = 2 diverges.
    const RadialProfile prof = integrate_h3(gamma3, prob, r0, r_max, ode);
    return mu_total(prof, static_cast<double>(prob.n), "mu3");
}

double invert_mu1(double c, const ProfileDeps& deps) {
    const double lo = underline_h(1.0, deps.env);
    const double mu_lo = mu1(lo, deps);
    if (c < mu_lo - 1e-12)
        fail(Err::BelowCStar, "invert_mu1: c = " + std::to_string(c) +
                                  " below the bottom of the range mu1(" + std::to_string(lo) +
                                  ") = " + std::to_string(mu_lo));
    if (c <= mu_lo) return lo;

    double hi = std::max(2.0, 2.0 * lo);
    double mu_hi = mu1(hi, deps);
    int guard = 0;
    while (mu_hi < c) {
        hi *= 2.0;
        mu_hi = mu1(hi, deps);
        if (++guard > 40) fail(Err::RootNotBracketed, "invert_mu1: shift never reaches c");
    }
    auto f = [&](double b) { return mu1(b, deps) - c; };
    return find_root(f, lo, hi, mu_lo - c, mu_hi - c, 1e-9).value;
}

RadialW::RadialW() {
    profile_.r_grid = {1.0, 2.0};
    profile_.h_values = {1.0, 1.0};
    profile_.dh_dr = {0.0, 0.0};
    profile_.d2h_dr2 = {0.0, 0.0};
    profile_.shift_values = {0.0, 0.0};
    profile_.monotone = Monotone::Constant;
}

RadialW::RadialW(double alpha, RadialProfile profile, double r_from)
    : alpha_(alpha), r_from_(r_from), profile_(std::move(profile)) {
    v_from_ = profile_.shift_at(r_from);  // throws OutOfDomain below r0
}

double RadialW::operator()(double r) const {
    return alpha_ + 0.5 * (r * r - r_from_ * r_from_) + profile_.shift_at(r) - v_from_;
}

double RadialW::deriv(double r) const { return r * profile_.h(r); }

RadialW build_w(double alpha, const RadialProfile& profile, double r_from) {
    return RadialW(alpha, profile, r_from);
}

double asymptotic_constant(const RadialW& w) {
    const RadialProfile& prof = w.profile();
    const double v_inf = prof.shift_values.back() + prof.shift_remainder();
    // w(r) - r^2/2 = alpha - r_from^2/2 + V(r) - V(r_from) -> alpha -
    // r_from^2/2 + V(inf) - V(r_from), recovered from w at the outer node.
    const double re = prof.r_end();
    return w(re) - 0.5 * re * re + v_inf - prof.shift_at(re);
}

}  // namespace lmce
