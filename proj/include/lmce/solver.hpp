#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lmce/barriers.hpp"
#include "lmce/exec.hpp"
#include "lmce/linalg.hpp"
#include "lmce/ode.hpp"
#include "lmce/phase.hpp"

namespace lmce {

// Body-fitted polar grid on the annulus between a planar convex body and the
// circle of radius R around the body centre. Rays are uniform in angle; along
// each ray the nodes follow a geometric grading between the footpoint on the
// inner boundary and R, so radial steps track the arc growth. Ring 0 carries
// the inner Dirichlet data, ring nr the outer data; rings in between are the
// unknowns.
//
// The Cartesian Hessian at an interior node uses central differences in the
// (sigma, angle) chart mapped through the node's curvilinear metric, plus the
// smallest correction that makes the nine-point stencil reproduce quadratics
// in x exactly. Both parts are second-order; the correction leaves the
// mapped-difference stability intact because it shrinks with the mesh.
struct AnnularGrid {
    ConvexBody omega;
    double r_out = 0.0;
    int nr = 0;      // radial cells; rings 0..nr
    int ntheta = 0;  // angular nodes, periodic

    std::vector<double> foot;  // inner radius per angle (from the body centre)
    std::vector<VecN> pts;     // node coordinates, ring-major
    // Hessian weights per interior node: hess_w[idx][m][slot] is the weight
    // of stencil slot (di+1)*3 + (dj+1) in the Hessian component m, with the
    // components ordered (xx, xy, yy).
    std::vector<std::array<std::array<double, 9>, 3>> hess_w;
    // Inverse chart Jacobian rows per node (grad sigma; grad angle), used for
    // first derivatives.
    std::vector<std::array<VecN, 2>> inv_jac;

    int index(int ring, int j) const { return ring * ntheta + wrap(j); }
    int wrap(int j) const { return ((j % ntheta) + ntheta) % ntheta; }
    int size() const { return (nr + 1) * ntheta; }
    int interior_count() const { return (nr - 1) * ntheta; }
    const VecN& point(int ring, int j) const { return pts[static_cast<size_t>(index(ring, j))]; }
    double angle(int j) const;
    double sigma_step() const { return 1.0 / nr; }
    double angle_step() const;

    // Largest node separation along a coordinate line; drives discretization
    // tolerances.
    double max_cell() const;
    // Quasi-uniformity measure: largest over smallest such separation.
    double cell_ratio() const;
};

AnnularGrid make_annular_grid(const ConvexBody& omega, double r_out, int nr, int ntheta);

struct AnnularField {
    std::vector<double> v;

    AnnularField() = default;
    explicit AnnularField(const AnnularGrid& g) : v(static_cast<size_t>(g.size()), 0.0) {}
    double& at(int idx) { return v[static_cast<size_t>(idx)]; }
    double at(int idx) const { return v[static_cast<size_t>(idx)]; }
};

// Residual of the phase equation at every interior node: F(D^2 u) - theta
// - f(x). Boundary entries are zero. Throws StencilError when the grid has no
// interior ring or too few angles for the cross-derivative stencil.
AnnularField residual(const AnnularField& u, const PhaseProblem& prob, const AnnularGrid& grid,
                      Exec exec = Exec::Parallel);

// Discrete Hessian and gradient at a node (interior for the Hessian; the
// gradient also works on ring 0 with a one-sided radial difference).
SymMatrix hessian_at(const AnnularGrid& grid, const AnnularField& u, int ring, int j);
VecN gradient_at(const AnnularGrid& grid, const AnnularField& u, int ring, int j);

struct SolveOptions {
    double tol = 1e-9;
    int max_iter = 50;
    bool damping = true;  // backtracking line search on the residual norm
    Exec exec = Exec::Parallel;
};

struct ConvergenceReport {
    bool converged = false;
    int iterations = 0;
    std::vector<double> residual_history;  // sup norms, including the initial one
    int backtracks = 0;                    // total halvings across the run
};

struct NewtonResult {
    AnnularField u;
    ConvergenceReport report;
};

// Damped Newton iteration on the interior unknowns with Dirichlet rows fixed:
// ring 0 takes phi(x), ring nr takes the supplied outer values (one per
// angle). Jacobian rows use the spectral derivative of the arctan sum; the
// linear systems go through a sparse LU factorization. A singular
// factorization throws; running out of iterations returns the best iterate
// with report.converged = false.
NewtonResult newton_solve(const AnnularGrid& grid, const PhaseProblem& prob,
                          const BoundaryData& phi, const std::vector<double>& outer,
                          const AnnularField& init, const SolveOptions& opts = {});

// Default initial iterate: (1/2) x^T A x + c at every node, cut off to the
// inner Dirichlet data on ring 0.
AnnularField quadratic_init(const AnnularGrid& grid, const SymMatrix& a, double c,
                            const BoundaryData& phi);

// Radially symmetric exact solution: integrates the scalar reduction
//   u'' = tan(theta + f(rho) - (n-1) arctan(u'/rho))
// outward from (inner_r, inner_value, inner_slope). Proposed evaluations that
// would push the tangent argument out of the principal branch are vetoed so
// the controller retries with shorter steps; if it collapses entirely the
// run throws PhaseEscape.
struct RadialSolution {
    int n = 0;
    double r_lo = 0.0;
    double r_hi = 0.0;
    std::vector<OdeNode> trace;

    double value(double rho) const;
    double slope(double rho) const;
};

RadialSolution radial_solve(const PhaseProblem& prob, double inner_r, double inner_value,
                            double inner_slope, double outer_r, const OdeOptions& ode = {});

struct SandwichCheck {
    bool pass = false;
    double min_under = 0.0;  // min of u - under
    double min_over = 0.0;   // min of over - u
    double tol = 0.0;
    VecN worst_under_point;
    VecN worst_over_point;
};

// Orders the solved field against two barriers on every grid node. The
// tolerance absorbs discretization error: 10 * (largest cell)^2.
SandwichCheck verify_sandwich(const AnnularField& u, const AnnularGrid& grid,
                              const std::function<double(const VecN&)>& under,
                              const std::function<double(const VecN&)>& over);

// Gathers nodes with |x - centre| in [r_lo, r_hi] for expansion fitting.
void window_samples(const AnnularGrid& grid, const AnnularField& u, double r_lo, double r_hi,
                    std::vector<VecN>& xs, std::vector<double>& us);

}  // namespace lmce
