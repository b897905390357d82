#pragma once

#include <optional>
#include <vector>

#include "lmce/envelopes.hpp"
#include "lmce/exec.hpp"
#include "lmce/linalg.hpp"
#include "lmce/phase.hpp"
#include "lmce/profiles.hpp"

namespace lmce {

// Generalized radially symmetric functions w(x) = phi(r_A(x)) and the
// machinery built on them: Hessians, pointwise sub/supersolution margins on
// sample sets, quadratic boundary barriers, and the spliced sandwich that
// encloses the exterior Dirichlet solution.

struct GenSymFunction {
    EigenDecomp a_frame;  // spectral frame of A
    SymMatrix a;
    RadialW w;  // radial part; phi'(r) = r h(r)

    double r_of(const VecN& x) const;  // r_A(x) = sqrt(x^T A x)
    // All three throw OutOfDomain when r_A(x) < w.r_from().
    double operator()(const VecN& x) const;
    VecN gradient(const VecN& x) const;  // h(r) A x
};

GenSymFunction make_gensym(const SymMatrix& a, RadialW w);

// Hessian in ambient coordinates: h(r) A + (h'(r)/r) (Ax)(Ax)^T, which is
// the eigenframe formula a_i h delta_ij + r^-1 h' (a_i y_i)(a_j y_j) rotated
// back.
SymMatrix hessian_gensym(const GenSymFunction& g, const VecN& x);

// Strictly convex body {x : (x - center)^T B (x - center) < rho^2}. The
// center is zero in the normalized problem; a nonzero linear term b in the
// prescribed quadratic moves it.
struct ConvexBody {
    SymMatrix b;
    double rho = 1.0;
    VecN center;

    int dim() const { return b.dim(); }
    bool contains(const VecN& x) const;
    VecN normal(const VecN& xi) const;  // outward unit normal
    // Deterministic boundary mesh: uniform ellipse angles in 2D, a subdivided
    // icosahedron pushed through the shape matrix in 3D, low-discrepancy
    // directions above. count = 0 picks 720 (2D) or 2562 (3D).
    std::vector<VecN> boundary_points(int count = 0) const;
};

ConvexBody make_ellipsoid(const SymMatrix& b, double rho, const VecN& center = {});

// Boundary data: the restriction of the ambient quadratic
// x^T P x / 2 + q.x + s to the boundary. Restrictions of smooth functions
// are semi-convex with respect to any C^{1,1} boundary, which is the class
// the boundary barriers need.
struct BoundaryData {
    SymMatrix p;
    VecN q;
    double s = 0.0;
    double semiconvexity = 0.0;  // metadata, not used numerically

    double operator()(const VecN& xi) const;
    VecN gradient(const VecN& xi) const;
};

BoundaryData constant_boundary(int dim, double value);

// Q_xi(x) = phi(xi) + (K/2)[(x - xbar)^T A (x - xbar)
//                           - (xi - xbar)^T A (xi - xbar)]
// with xbar = xi - (1/K) A^{-1}(grad_T phi(xi) + sigma nu(xi)) placed so the
// tangential gradient of Q_xi - phi vanishes at xi and the normal shift
// sigma pushes Q_xi strictly below phi elsewhere on the boundary.
struct BoundaryQuadratic {
    VecN xi;
    VecN xbar;
    double k = 1.0;
    SymMatrix a;
    double phi_xi = 0.0;
    double sigma = 0.0;

    double operator()(const VecN& x) const;
};

// Searches sigma by doubling until Q_xi < phi holds on the sampled boundary
// away from xi; BarrierSeparationFailed when no sigma works (degenerate
// body). resolution = 0 uses the dimension default.
BoundaryQuadratic boundary_Q(const VecN& xi, const ConvexBody& omega, const BoundaryData& phi,
                             double k, const SymMatrix& a, int resolution = 0);

// Pointwise max of the leaf quadratics over a boundary mesh; equals phi on
// the mesh nodes and is a subsolution (max of subsolutions).
struct BoundaryEnvelope {
    std::vector<BoundaryQuadratic> leaves;

    double operator()(const VecN& x) const;
};

BoundaryEnvelope make_boundary_envelope(const ConvexBody& omega, const BoundaryData& phi,
                                        double k, const SymMatrix& a, int resolution = 0,
                                        Exec exec = Exec::Parallel);

// Pointwise margin sweep. For the subsolution side the margin is
// F(D^2 w) - (theta + f); for the supersolution side it is flipped and a
// validity radius r_bar is detected: the smallest sampled r_A beyond which
// the margin never dips below -1e-8.
struct MarginReport {
    bool pass = false;
    double min_margin = 0.0;
    VecN worst_point;
    double worst_radius = 0.0;
    double r_bar = 0.0;  // = domain start for the subsolution side
    int samples = 0;
};

MarginReport check_subsolution(const GenSymFunction& g, const PhaseProblem& prob,
                               const std::vector<VecN>& samples, Exec exec = Exec::Parallel);
MarginReport check_supersolution(const GenSymFunction& g, const PhaseProblem& prob,
                                 const std::vector<VecN>& samples, Exec exec = Exec::Parallel);

// Deterministic low-discrepancy samples of the shell
// {r_lo <= r_A(x) <= r_hi}; directions from Box-Muller on Halton points.
std::vector<VecN> annulus_samples(const SymMatrix& a, double r_lo, double r_hi, int count);

// max{Q, w} glued along the A-ellipsoid rings r1 < r2: Q inside E_r1, the
// max on E_r2 \ E_r1, w outside. Construction verifies the ring orderings
// w <= Q on the r1 ring and w > Q on the r2 ring, which make the glue
// continuous.
struct SplicedSub {
    BoundaryEnvelope q;
    GenSymFunction w;
    double r1 = 0.0;
    double r2 = 0.0;

    double operator()(const VecN& x) const;
    int piece_id(const VecN& x) const;  // 0 = Q, 1 = seam band, 2 = w
};

SplicedSub splice_sub(const BoundaryEnvelope& q, const GenSymFunction& w_under, double r1,
                      double r2, int ring_samples = 1000);

// min{w_tilde, w_over} glued along Euclidean rings r3 < r4 (the radial piece
// lives on balls): w_tilde inside B_r3, the min between, w_over outside.
struct SplicedSup {
    GenSymFunction w_tilde;
    GenSymFunction w_over;
    double r3 = 0.0;
    double r4 = 0.0;

    double operator()(const VecN& x) const;
    int piece_id(const VecN& x) const;
};

SplicedSup splice_sup(const GenSymFunction& w_tilde, const GenSymFunction& w_over, double r3,
                      double r4, int ring_samples = 1000);

// Full sandwich assembly for the exterior problem on R^n \ Omega.
struct BarrierProblem {
    PhaseProblem prob;
    SymMatrix a;  // on the theta level set; positive definite
    ConvexBody omega;
    BoundaryData phi;
    double c = 0.0;  // prescribed asymptotic constant

    int boundary_resolution = 0;  // 0 = dimension default
    int sample_count = 20000;     // verification sweep size
    double r_max = 1e4;           // outer radius of the profile integrations
    OdeOptions ode;
    Exec exec = Exec::Parallel;
    // Accept configurations whose decay rate d(A, eps0) is <= 2 and build the
    // lower barrier only (supercritical phases permit this; the shift
    // integrals diverge, so no asymptotic matching happens).
    bool allow_one_sided = false;
};

struct BarrierAssembly {
    EnvelopePair env;
    double eps0 = 0.0;
    double d_eff = 0.0;  // d(A, eps0), the quadratic-convergence rate

    double k = 1.0;  // g(K lambda(A)) = theta + delta
    BoundaryEnvelope q;
    double alpha1 = 0.0;
    double beta1_hat = 0.0;  // ring-ordering search result
    double c_star = 0.0;     // asymptotic constant at beta1_hat
    double beta1_c = 0.0;    // solves the constant = c
    double r1 = 0.0, r2 = 0.0;
    SplicedSub lower;

    // Supersolution side; absent when the shift integrals diverge
    // (d_eff <= 2, only possible outside the admissible family, or n = 2).
    bool two_sided = false;
    bool quad_shortcut = false;  // f == 0: upper barrier is the quadratic itself
    double c_star2 = 0.0;        // boundary-clearance threshold
    double beta2 = 0.0;
    double gamma3_hat = 0.0;
    double r3 = 0.0, r4 = 0.0;
    double r_bar = 0.0;  // detected supersolution validity radius
    std::optional<SplicedSup> upper;
    std::optional<GenSymFunction> upper_quad;  // the f == 0 shortcut

    MarginReport sub_report;
    MarginReport sup_report;
    double q_margin = 0.0;         // min over samples of delta - f
    double sandwich_gap = 0.0;     // min over samples of upper - lower
    double closure_at_rmax = 0.0;  // (upper - lower) at the outer radius
};

// Runs the construction end to end: envelopes, boundary envelope Q, the
// lower splice through the shift-constant inversion, the upper splice (or
// the quadratic shortcut when f == 0), and the verification sweeps.
// BelowCStar reports the least admissible c; SandwichViolated a failed
// lower <= upper sweep.
BarrierAssembly construct_barriers(const BarrierProblem& bp);

}  // namespace lmce
