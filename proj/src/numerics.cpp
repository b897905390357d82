#include "lmce/numerics.hpp"

#include <cmath>
#include <string>

#include "lmce/error.hpp"

namespace lmce {

RootResult find_root(const std::function<double(double)>& f, double lo, double hi,
                     double f_lo, double f_hi, double tol,
                     const std::function<double(double)>& df, int max_iter) {
    if (!(lo <= hi)) fail(Err::RootNotBracketed, "empty interval");
    if (f_lo == 0.0) return {lo, 0.0, lo, lo, 0};
    if (f_hi == 0.0) return {hi, 0.0, hi, hi, 0};
    if ((f_lo > 0.0) == (f_hi > 0.0))
        fail(Err::RootNotBracketed, "f(" + std::to_string(lo) + ") and f(" + std::to_string(hi) +
                                        ") have the same sign");

    double x = 0.5 * (lo + hi);
    double fx = f(x);
    int it = 0;
    for (; it < max_iter; ++it) {
        if (std::fabs(fx) <= tol) break;
        // Maintain the sign-changing bracket.
        if ((fx > 0.0) == (f_hi > 0.0)) {
            hi = x;
            f_hi = fx;
        } else {
            lo = x;
            f_lo = fx;
        }
        double x_next;
        bool ok = false;
        if (df) {
            const double d = df(x);
            if (d != 0.0 && std::isfinite(d)) {
                x_next = x - fx / d;
                ok = (x_next > lo && x_next < hi);
            } else {
                x_next = 0.0;
            }
        } else {
            // Secant through the bracket endpoints.
            const double denom = f_hi - f_lo;
            x_next = (denom != 0.0) ? lo - f_lo * (hi - lo) / denom : 0.0;
            ok = (x_next > lo && x_next < hi);
        }
        if (!ok) x_next = 0.5 * (lo + hi);
        if (x_next == x) x_next = 0.5 * (lo + hi);
        x = x_next;
        fx = f(x);
        if (hi - lo < 1e-300) break;
    }
    if (std::fabs(fx) > tol)
        fail(Err::MaxIterations, "root refinement stalled at residual " + std::to_string(fx));
    return {x, fx, lo, hi, it};
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit out;
    const size_t m = x.size();
    if (m != y.size() || m < 2) fail(Err::InvalidInput, "fit_line needs >= 2 paired points");
    double sx = 0.0, sy = 0.0;
    for (size_t i = 0; i < m; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / static_cast<double>(m);
    const double my = sy / static_cast<double>(m);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (size_t i = 0; i < m; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) fail(Err::FitDegenerate, "fit_line: all abscissae identical");
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    out.count = static_cast<int>(m);
    if (syy == 0.0) {
        out.r2 = 1.0;  // constant data, perfectly reproduced by slope 0
    } else {
        const double ss_res = syy - out.slope * sxy;
        out.r2 = 1.0 - ss_res / syy;
    }
    return out;
}

double halton(std::uint64_t index, int base) {
    double f = 1.0;
    double r = 0.0;
    const double inv = 1.0 / static_cast<double>(base);
    std::uint64_t i = index;
    while (i > 0) {
        f *= inv;
        r += f * static_cast<double>(i % static_cast<std::uint64_t>(base));
        i /= static_cast<std::uint64_t>(base);
    }
    return r;
}

}  // namespace lmce
