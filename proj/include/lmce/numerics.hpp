#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace lmce {

struct RootResult {
    double value = 0.0;
    double residual = 0.0;
    double lo = 0.0;  // final bracket
    double hi = 0.0;
    int iterations = 0;
};

// Safeguarded Newton on a sign-changing bracket [lo, hi]. Newton steps that
// leave the bracket, or that fail to shrink the residual, fall back to
// bisection, so convergence is guaranteed for continuous monotone residuals.
// The derivative is optional; without it the method is bisection with a
// secant acceleration.
RootResult find_root(const std::function<double(double)>& f, double lo, double hi,
                     double f_lo, double f_hi, double tol,
                     const std::function<double(double)>& df = nullptr, int max_iter = 200);

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double r2 = 0.0;
    int count = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Radical-inverse Halton value; deterministic low-discrepancy driver for
// sample sweeps.
double halton(std::uint64_t index, int base);

}  // namespace lmce
