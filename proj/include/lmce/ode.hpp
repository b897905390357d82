#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

namespace lmce {

// State dimension is at most 3 (profile value plus running integrals), so
// stages live in fixed arrays.
inline constexpr int kMaxState = 4;

using OdeState = std::array<double, kMaxState>;

// Right-hand side callback. Returning false vetoes the proposed evaluation
// point (the step is retried with a smaller size); this is how stiff spots
// such as a tangent argument approaching +-pi/2 are handled without leaving
// the admissible region.
using OdeRhs = std::function<bool(double t, const OdeState& y, OdeState& dydt)>;

struct OdeOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-9;
    double initial_step = 0.0;  // 0 = automatic
    double max_step = 0.0;      // 0 = unlimited
    std::size_t max_steps = 4000000;
};

struct OdeNode {
    double t = 0.0;
    OdeState y{};
    OdeState dy{};
};

// Adaptive Dormand-Prince 5(4) embedded pair, integrating forward from t0 to
// t1 and recording every accepted step. Throws MaxIterations when the step
// controller collapses (e.g. a persistent RHS veto).
std::vector<OdeNode> integrate_ode(const OdeRhs& rhs, int dim, double t0, double t1,
                                   const OdeState& y0, const OdeOptions& opt);

// Cubic Hermite evaluation on the accepted-step nodes; t must lie within the
// recorded range.
double ode_eval(const std::vector<OdeNode>& nodes, double t, int component);
double ode_eval_deriv(const std::vector<OdeNode>& nodes, double t, int component);

}  // namespace lmce
