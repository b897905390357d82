#include "lmce/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lmce/error.hpp"

namespace lmce {

namespace {

// Dormand-Prince 5(4) tableau. The seventh stage equals the fifth-order
// solution (FSAL), so an accepted step reuses it as the next first stage.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// Difference between the fifth- and fourth-order weights.
constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695, e4 = b4 - 393.0 / 640,
                 e5 = b5 + 92097.0 / 339200, e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

}  // namespace

std::vector<OdeNode> integrate_ode(const OdeRhs& rhs, int dim, double t0, double t1,
                                   const OdeState& y0, const OdeOptions& opt) {
    if (dim < 1 || dim > kMaxState) fail(Err::InvalidInput, "integrate_ode: bad state dimension");
    if (!(t1 > t0)) fail(Err::InvalidInput, "integrate_ode: need t1 > t0");

    const double span = t1 - t0;
    double h = opt.initial_step > 0.0 ? opt.initial_step : span * 1e-4;
    if (opt.max_step > 0.0) h = std::min(h, opt.max_step);

    std::vector<OdeNode> nodes;
    nodes.reserve(1024);

    double t = t0;
    OdeState y = y0;
    OdeState k1{};
    if (!rhs(t, y, k1)) fail(Err::OutOfDomain, "integrate_ode: initial state rejected");
    nodes.push_back({t, y, k1});

    const double h_floor = span * 1e-14;
    std::size_t steps = 0;
    while (t < t1) {
        if (++steps > opt.max_steps) fail(Err::MaxIterations, "integrate_ode: step budget exhausted");
        h = std::min(h, t1 - t);

        OdeState k2{}, k3{}, k4{}, k5{}, k6{}, k7{}, yt{}, y5{};
        bool vetoed = false;
        auto stage = [&](double frac, const OdeState& yy, OdeState& kk) {
            if (!rhs(t + frac * h, yy, kk)) vetoed = true;
            return !vetoed;
        };

        for (int i = 0; i < dim; ++i) yt[i] = y[i] + h * a21 * k1[i];
        if (stage(c2, yt, k2)) {
            for (int i = 0; i < dim; ++i) yt[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
            if (stage(c3, yt, k3)) {
                for (int i = 0; i < dim; ++i)
                    yt[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
                if (stage(c4, yt, k4)) {
                    for (int i = 0; i < dim; ++i)
                        yt[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
                    if (stage(c5, yt, k5)) {
                        for (int i = 0; i < dim; ++i)
                            yt[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                                                a64 * k4[i] + a65 * k5[i]);
                        if (stage(1.0, yt, k6)) {
                            for (int i = 0; i < dim; ++i)
                                y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] +
                                                    b5 * k5[i] + b6 * k6[i]);
                            stage(1.0, y5, k7);
                        }
                    }
                }
            }
        }

        if (vetoed) {
            h *= 0.25;
            if (h < h_floor)
                fail(Err::PhaseEscape,
                     "integrate_ode: step collapsed at t = " + std::to_string(t));
            continue;
        }

        double err = 0.0;
        for (int i = 0; i < dim; ++i) {
            const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                   e6 * k6[i] + e7 * k7[i]);
            const double sc = opt.abs_tol + opt.rel_tol * std::max(std::fabs(y[i]), std::fabs(y5[i]));
            err += (ei / sc) * (ei / sc);
        }
        err = std::sqrt(err / dim);

        if (err <= 1.0) {
            t += h;
            y = y5;
            k1 = k7;
            nodes.push_back({t, y, k1});
        }

        double factor = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
        factor = std::clamp(factor, 0.2, 5.0);
        h *= factor;
        if (opt.max_step > 0.0) h = std::min(h, opt.max_step);
        if (h < h_floor && t < t1)
            fail(Err::MaxIterations, "integrate_ode: step underflow at t = " + std::to_string(t));
    }
    return nodes;
}

namespace {

std::size_t locate(const std::vector<OdeNode>& nodes, double t) {
    if (nodes.size() < 2) fail(Err::InvalidInput, "ode_eval: need at least two nodes");
    if (t < nodes.front().t - 1e-12 || t > nodes.back().t + 1e-12)
        fail(Err::OutOfDomain, "ode_eval: t = " + std::to_string(t) + " outside recorded range");
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), t,
                                     [](double v, const OdeNode& n) { return v < n.t; });
    std::size_t i = static_cast<std::size_t>(std::distance(nodes.begin(), it));
    if (i == 0) return 0;
    if (i >= nodes.size()) return nodes.size() - 2;
    return i - 1;
}

}  // namespace

double ode_eval(const std::vector<OdeNode>& nodes, double t, int component) {
    const std::size_t i = locate(nodes, t);
    const OdeNode& a = nodes[i];
    const OdeNode& b = nodes[i + 1];
    const double dt = b.t - a.t;
    if (dt <= 0.0) return a.y[component];
    const double s = std::clamp((t - a.t) / dt, 0.0, 1.0);
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * a.y[component] + h10 * dt * a.dy[component] + h01 * b.y[component] +
           h11 * dt * b.dy[component];
}

double ode_eval_deriv(const std::vector<OdeNode>& nodes, double t, int component) {
    const std::size_t i = locate(nodes, t);
    const OdeNode& a = nodes[i];
    const OdeNode& b = nodes[i + 1];
    const double dt = b.t - a.t;
    if (dt <= 0.0) return a.dy[component];
    const double s = std::clamp((t - a.t) / dt, 0.0, 1.0);
    const double s2 = s * s;
    const double d00 = (6 * s2 - 6 * s) / dt;
    const double d10 = 3 * s2 - 4 * s + 1;
    const double d01 = (-6 * s2 + 6 * s) / dt;
    const double d11 = 3 * s2 - 2 * s;
    return d00 * a.y[component] + d10 * a.dy[component] + d01 * b.y[component] +
           d11 * b.dy[component];
}

}  // namespace lmce
