#include "lmce/barriers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>

#include "lmce/numerics.hpp"

namespace lmce {

namespace {

constexpr double kMarginTol = 1e-8;   // sub/supersolution pass threshold
constexpr double kSeamTol = 1e-9;     // splice continuity / ordering slack
constexpr double kSandwichTol = 1e-9;
constexpr double kTwoSidedCut = 2.02;  // least decay rate with a usable shift integral

constexpr int kPrimes[10] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};

// Unit direction from Box-Muller applied to consecutive Halton coordinates;
// index >= 1 keeps every coordinate strictly inside (0, 1).
VecN halton_direction(std::uint64_t index, int dim) {
    VecN g(dim);
    const int pairs = (dim + 1) / 2;
    for (int j = 0; j < pairs; ++j) {
        const double u1 = halton(index, kPrimes[2 * j]);
        const double u2 = halton(index, kPrimes[2 * j + 1]);
        const double rad = std::sqrt(-2.0 * std::log(u1));
        g[2 * j] = rad * std::cos(2.0 * std::numbers::pi * u2);
        if (2 * j + 1 < dim) g[2 * j + 1] = rad * std::sin(2.0 * std::numbers::pi * u2);
    }
    return (1.0 / norm(g)) * g;
}

// Scales a direction onto the level set r_A(x) = r.
VecN level_point(const SymMatrix& a, const VecN& dir, double r) {
    return (r / quad_form(a, dir)) * dir;
}

std::vector<VecN> euclidean_ring(int dim, double radius, int count) {
    std::vector<VecN> pts;
    pts.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) pts.push_back(radius * halton_direction(i + 1u, dim));
    return pts;
}

std::vector<VecN> ellipsoid_ring(const SymMatrix& a, double radius, int count) {
    std::vector<VecN> pts;
    pts.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i)
        pts.push_back(level_point(a, halton_direction(i + 1u, a.dim()), radius));
    return pts;
}

MatN inverse_sqrt(const SymMatrix& b) {
    const EigenDecomp e = eig_sym(b);
    VecN inv(e.n);
    for (int i = 0; i < e.n; ++i) {
        if (e.lambda[i] <= 0.0)
            fail(Err::NotPositiveDefinite, "convex body shape matrix is not positive definite");
        inv[i] = 1.0 / std::sqrt(e.lambda[i]);
    }
    return SymMatrix::from_spectrum(e.q, inv).dense();
}

// Icosahedron subdivided k times and projected back to the unit sphere:
// 10 * 4^k + 2 vertices.
std::vector<VecN> icosphere(int level) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<std::array<double, 3>> v = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
        {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    std::vector<std::array<int, 3>> f = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},
        {5, 11, 4}, {11, 10, 2}, {10, 7, 6},  {7, 1, 8},  {3, 9, 4},   {3, 4, 2},
        {3, 2, 6},  {3, 6, 8},  {3, 8, 9},   {4, 9, 5},  {2, 4, 11},  {6, 2, 10},
        {8, 6, 7},  {9, 8, 1}};
    auto normalize = [](std::array<double, 3>& p) {
        const double s = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
        p = {p[0] / s, p[1] / s, p[2] / s};
    };
    for (auto& p : v) normalize(p);

    for (int lev = 0; lev < level; ++lev) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int i, int j) {
            const std::pair<int, int> key = std::minmax(i, j);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            std::array<double, 3> m = {(v[i][0] + v[j][0]) / 2.0, (v[i][1] + v[j][1]) / 2.0,
                                       (v[i][2] + v[j][2]) / 2.0};
            normalize(m);
            v.push_back(m);
            const int idx = static_cast<int>(v.size()) - 1;
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(f.size() * 4);
        for (const auto& tri : f) {
            const int a = mid(tri[0], tri[1]);
            const int b = mid(tri[1], tri[2]);
            const int c = mid(tri[2], tri[0]);
            next.push_back({tri[0], a, c});
            next.push_back({tri[1], b, a});
            next.push_back({tri[2], c, b});
            next.push_back({a, b, c});
        }
        f = std::move(next);
    }

    std::vector<VecN> out;
    out.reserve(v.size());
    for (const auto& p : v) out.push_back(VecN{p[0], p[1], p[2]});
    return out;
}

VecN tangential_gradient(const BoundaryData& phi, const VecN& xi, const VecN& nu) {
    const VecN g = phi.gradient(xi);
    return g - dot(g, nu) * nu;
}

BoundaryQuadratic make_leaf(const VecN& xi, const ConvexBody& omega, const BoundaryData& phi,
                            double k, const SymMatrix& a, double sigma) {
    const VecN nu = omega.normal(xi);
    const VecN shift = solve_spd(a, tangential_gradient(phi, xi, nu) + sigma * nu);
    BoundaryQuadratic q;
    q.xi = xi;
    q.xbar = xi - (1.0 / k) * shift;
    q.k = k;
    q.a = a;
    q.phi_xi = phi(xi);
    q.sigma = sigma;
    return q;
}

// Strict domination Q_xi < phi away from xi, with a threshold scaling like
// the squared separation because the difference vanishes to second order at
// the touching point.
bool leaf_dominates(const BoundaryQuadratic& q, const BoundaryData& phi,
                    const std::vector<VecN>& mesh) {
    for (const VecN& x : mesh) {
        const VecN d = x - q.xi;
        const double sep = dot(d, d);
        if (sep < 1e-20) continue;
        if (q(x) - phi(x) > -1e-10 * sep) return false;
    }
    return true;
}

MarginReport margin_sweep(const GenSymFunction& g, const PhaseProblem& prob,
                          const std::vector<VecN>& samples, bool sub_side, Exec exec) {
    const int m = static_cast<int>(samples.size());
    if (m == 0) fail(Err::InvalidInput, "margin sweep needs a nonempty sample set");
    std::vector<double> margin(static_cast<size_t>(m)), radius(static_cast<size_t>(m));
    for_each_index(m, exec, [&](int i) {
        const VecN& x = samples[static_cast<size_t>(i)];
        radius[static_cast<size_t>(i)] = g.r_of(x);
        const double fval = F_of(hessian_gensym(g, x));
        const double target = prob.theta + prob.f(norm(x));
        margin[static_cast<size_t>(i)] = sub_side ? fval - target : target - fval;
    });

    MarginReport rep;
    rep.samples = m;

    auto record_min = [&](const std::vector<int>& idx) {
        int best = idx.front();
        for (int i : idx)
            if (margin[static_cast<size_t>(i)] < margin[static_cast<size_t>(best)]) best = i;
        rep.min_margin = margin[static_cast<size_t>(best)];
        rep.worst_point = samples[static_cast<size_t>(best)];
        rep.worst_radius = radius[static_cast<size_t>(best)];
    };

    std::vector<int> order(static_cast<size_t>(m));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
        return radius[static_cast<size_t>(i)] < radius[static_cast<size_t>(j)];
    });

    if (sub_side) {
        record_min(order);
        rep.r_bar = g.w.r_from();
        rep.pass = rep.min_margin >= -kMarginTol;
        return rep;
    }

    // Supersolution side: find the largest suffix of radii on which the
    // margin never dips; its inner edge is the detected validity radius.
    int cut = m;  // order[cut..] is the passing suffix
    for (int pos = m - 1; pos >= 0; --pos) {
        if (margin[static_cast<size_t>(order[static_cast<size_t>(pos)])] < -kMarginTol) break;
        cut = pos;
    }
    if (cut == m) {
        record_min(order);
        rep.r_bar = std::numeric_limits<double>::infinity();
        rep.pass = false;
        return rep;
    }
    std::vector<int> suffix(order.begin() + cut, order.end());
    record_min(suffix);
    rep.r_bar = (cut == 0) ? g.w.r_from() : radius[static_cast<size_t>(suffix.front())];
    rep.pass = true;
    return rep;
}

// Constant profile h = 1 on [r0, r1]: the quadratic (1/2) r^2 + const as a
// radial object, used by the f = 0 shortcut.
RadialProfile unit_profile(double r0, double r1) {
    RadialProfile prof;
    const int nodes = 33;
    for (int i = 0; i < nodes; ++i) {
        const double r = r0 * std::pow(r1 / r0, static_cast<double>(i) / (nodes - 1));
        prof.r_grid.push_back(r);
        prof.h_values.push_back(1.0);
        prof.dh_dr.push_back(0.0);
        prof.d2h_dr2.push_back(0.0);
        prof.shift_values.push_back(0.0);
    }
    prof.monotone = Monotone::Constant;
    return prof;
}

}  // namespace

double GenSymFunction::r_of(const VecN& x) const { return quad_form(a, x); }

double GenSymFunction::operator()(const VecN& x) const { return w(r_of(x)); }

VecN GenSymFunction::gradient(const VecN& x) const {
    const double r = r_of(x);
    if (r < w.r_from() - 1e-12)
        fail(Err::OutOfDomain, "generalized symmetric function evaluated inside its core");
    return w.profile().h(r) * a.apply(x);
}

GenSymFunction make_gensym(const SymMatrix& a, RadialW w) {
    return GenSymFunction{eig_sym(a), a, std::move(w)};
}

SymMatrix hessian_gensym(const GenSymFunction& g, const VecN& x) {
    const double r = g.r_of(x);
    if (r < g.w.r_from() - 1e-12)
        fail(Err::OutOfDomain, "hessian_gensym: point inside the excluded core");
    const double h = g.w.profile().h(r);
    const double hp = g.w.profile().h_prime(r);
    const VecN ax = g.a.apply(x);
    SymMatrix out = h * g.a;
    for (int i = 0; i < g.a.dim(); ++i)
        for (int j = 0; j <= i; ++j) out.add(i, j, hp / r * ax[i] * ax[j]);
    return out;
}

bool ConvexBody::contains(const VecN& x) const {
    const VecN d = x - center;
    return quad_form(b, d) < rho;
}

VecN ConvexBody::normal(const VecN& xi) const {
    const VecN g = b.apply(xi - center);
    return (1.0 / norm(g)) * g;
}

std::vector<VecN> ConvexBody::boundary_points(int count) const {
    const int n = dim();
    const MatN half = inverse_sqrt(b);
    std::vector<VecN> sphere;
    if (n == 2) {
        const int m = count > 0 ? count : 720;
        for (int i = 0; i < m; ++i) {
            const double t = 2.0 * std::numbers::pi * i / m;
            sphere.push_back(VecN{std::cos(t), std::sin(t)});
        }
    } else if (n == 3) {
        int level = 4;  // 2562 points
        if (count > 0) {
            level = 0;
            while (10 * (1 << (2 * level)) + 2 < count && level < 6) ++level;
        }
        sphere = icosphere(level);
    } else {
        const int m = count > 0 ? count : 2048;
        for (int i = 0; i < m; ++i) sphere.push_back(halton_direction(i + 1u, n));
    }
    std::vector<VecN> out;
    out.reserve(sphere.size());
    for (const VecN& u : sphere) out.push_back(center + rho * matvec(half, u));
    return out;
}

ConvexBody make_ellipsoid(const SymMatrix& b, double rho, const VecN& center) {
    if (!is_positive_definite(b))
        fail(Err::NotPositiveDefinite, "make_ellipsoid: shape matrix not positive definite");
    if (!(rho > 0.0)) fail(Err::InvalidInput, "make_ellipsoid: level must be positive");
    VecN c = center;
    if (c.n == 0) c = VecN(b.dim());
    if (c.n != b.dim()) fail(Err::InvalidInput, "make_ellipsoid: center dimension mismatch");
    return ConvexBody{b, rho, c};
}

double BoundaryData::operator()(const VecN& xi) const {
    return 0.5 * dot(xi, p.apply(xi)) + dot(q, xi) + s;
}

VecN BoundaryData::gradient(const VecN& xi) const { return p.apply(xi) + q; }

BoundaryData constant_boundary(int dim, double value) {
    return BoundaryData{SymMatrix(dim), VecN(dim), value, 0.0};
}

double BoundaryQuadratic::operator()(const VecN& x) const {
    const VecN dx = x - xbar;
    const VecN dxi = xi - xbar;
    return phi_xi + 0.5 * k * (dot(dx, a.apply(dx)) - dot(dxi, a.apply(dxi)));
}

BoundaryQuadratic boundary_Q(const VecN& xi, const ConvexBody& omega, const BoundaryData& phi,
                             double k, const SymMatrix& a, int resolution) {
    const std::vector<VecN> mesh = omega.boundary_points(resolution);
    double sigma = 1.0;
    for (int iter = 0; iter < 40; ++iter) {
        BoundaryQuadratic leaf = make_leaf(xi, omega, phi, k, a, sigma);
        if (leaf_dominates(leaf, phi, mesh)) return leaf;
        sigma *= 2.0;
    }
    fail(Err::BarrierSeparationFailed,
         "boundary_Q: no normal shift separates the quadratic from the boundary data");
}

double BoundaryEnvelope::operator()(const VecN& x) const {
    double best = -std::numeric_limits<double>::infinity();
    for (const BoundaryQuadratic& leaf : leaves) best = std::max(best, leaf(x));
    return best;
}

BoundaryEnvelope make_boundary_envelope(const ConvexBody& omega, const BoundaryData& phi,
                                        double k, const SymMatrix& a, int resolution,
                                        Exec exec) {
    const std::vector<VecN> mesh = omega.boundary_points(resolution);
    const int m = static_cast<int>(mesh.size());
    double sigma = 1.0;
    for (int iter = 0; iter < 40; ++iter) {
        BoundaryEnvelope env;
        env.leaves.resize(static_cast<size_t>(m));
        std::vector<char> ok(static_cast<size_t>(m), 0);
        for_each_index(m, exec, [&](int i) {
            env.leaves[static_cast<size_t>(i)] =
                make_leaf(mesh[static_cast<size_t>(i)], omega, phi, k, a, sigma);
            ok[static_cast<size_t>(i)] =
                leaf_dominates(env.leaves[static_cast<size_t>(i)], phi, mesh) ? 1 : 0;
        });
        if (std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; })) return env;
        sigma *= 2.0;
    }
    fail(Err::BarrierSeparationFailed,
         "make_boundary_envelope: strict domination unreachable on the boundary mesh");
}

MarginReport check_subsolution(const GenSymFunction& g, const PhaseProblem& prob,
                               const std::vector<VecN>& samples, Exec exec) {
    return margin_sweep(g, prob, samples, true, exec);
}

MarginReport check_supersolution(const GenSymFunction& g, const PhaseProblem& prob,
                                 const std::vector<VecN>& samples, Exec exec) {
    return margin_sweep(g, prob, samples, false, exec);
}

std::vector<VecN> annulus_samples(const SymMatrix& a, double r_lo, double r_hi, int count) {
    if (!(r_lo > 0.0) || !(r_hi >= r_lo))
        fail(Err::InvalidInput, "annulus_samples: need 0 < r_lo <= r_hi");
    const int n = a.dim();
    const int radius_base = kPrimes[2 * ((n + 1) / 2)];
    std::vector<VecN> out;
    out.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        const VecN dir = halton_direction(i + 1u, n);
        const double r = r_lo + (r_hi - r_lo) * halton(i + 1u, radius_base);
        out.push_back(level_point(a, dir, r));
    }
    return out;
}

double SplicedSub::operator()(const VecN& x) const {
    const double r = w.r_of(x);
    if (r < r1) return q(x);
    if (r < r2) return std::max(q(x), w(x));
    return w(x);
}

int SplicedSub::piece_id(const VecN& x) const {
    const double r = w.r_of(x);
    return r < r1 ? 0 : (r < r2 ? 1 : 2);
}

SplicedSub splice_sub(const BoundaryEnvelope& q, const GenSymFunction& w_under, double r1,
                      double r2, int ring_samples) {
    if (!(r1 < r2)) fail(Err::InvalidInput, "splice_sub: need r1 < r2");
    if (r1 < w_under.w.r_from() - 1e-12)
        fail(Err::OutOfDomain, "splice_sub: inner ring below the profile base radius");
    const double w_r1 = w_under.w(r1);
    const double w_r2 = w_under.w(r2);
    double q_min_r1 = std::numeric_limits<double>::infinity();
    double q_max_r2 = -std::numeric_limits<double>::infinity();
    for (const VecN& x : ellipsoid_ring(w_under.a, r1, ring_samples))
        q_min_r1 = std::min(q_min_r1, q(x));
    for (const VecN& x : ellipsoid_ring(w_under.a, r2, ring_samples))
        q_max_r2 = std::max(q_max_r2, q(x));
    if (w_r1 > q_min_r1 + kSeamTol)
        fail(Err::SpliceOrderViolated, "splice_sub: radial piece exceeds the envelope on the "
                                       "inner ring (w = " +
                                           std::to_string(w_r1) + ", min Q = " +
                                           std::to_string(q_min_r1) + ")");
    if (w_r2 <= q_max_r2)
        fail(Err::SpliceOrderViolated, "splice_sub: radial piece fails to clear the envelope "
                                       "on the outer ring (w = " +
                                           std::to_string(w_r2) + ", max Q = " +
                                           std::to_string(q_max_r2) + ")");
    return SplicedSub{q, w_under, r1, r2};
}

double SplicedSup::operator()(const VecN& x) const {
    const double r = norm(x);
    if (r < r3) return w_tilde(x);
    if (r < r4) return std::min(w_tilde(x), w_over(x));
    return w_over(x);
}

int SplicedSup::piece_id(const VecN& x) const {
    const double r = norm(x);
    return r < r3 ? 0 : (r < r4 ? 1 : 2);
}

SplicedSup splice_sup(const GenSymFunction& w_tilde, const GenSymFunction& w_over, double r3,
                      double r4, int ring_samples) {
    if (!(r3 < r4)) fail(Err::InvalidInput, "splice_sup: need r3 < r4");
    double wt_max_r3 = -std::numeric_limits<double>::infinity();
    double wo_min_r3 = std::numeric_limits<double>::infinity();
    double wt_min_r4 = std::numeric_limits<double>::infinity();
    double wo_max_r4 = -std::numeric_limits<double>::infinity();
    const int n = w_over.a.dim();
    for (const VecN& x : euclidean_ring(n, r3, ring_samples)) {
        wt_max_r3 = std::max(wt_max_r3, w_tilde(x));
        wo_min_r3 = std::min(wo_min_r3, w_over(x));
    }
    for (const VecN& x : euclidean_ring(n, r4, ring_samples)) {
        wt_min_r4 = std::min(wt_min_r4, w_tilde(x));
        wo_max_r4 = std::max(wo_max_r4, w_over(x));
    }
    if (wt_max_r3 > wo_min_r3 + kSeamTol)
        fail(Err::SpliceOrderViolated,
             "splice_sup: radial piece exceeds the generalized piece on the inner ring");
    if (wt_min_r4 < wo_max_r4 - kSeamTol)
        fail(Err::SpliceOrderViolated,
             "splice_sup: radial piece dips below the generalized piece on the outer ring");
    return SplicedSup{w_tilde, w_over, r3, r4};
}

BarrierAssembly construct_barriers(const BarrierProblem& bp) {
    const PhaseProblem& prob = bp.prob;
    prob.validate();
    const int n = prob.n;
    if (bp.omega.dim() != n || bp.a.dim() != n)
        fail(Err::InvalidInput, "construct_barriers: dimension mismatch");

    BarrierAssembly out;
    out.env = make_envelopes(prob, bp.a);
    const VecN& a_eigs = out.env.a;
    const double a1 = a_eigs[0];
    const double an = a_eigs[n - 1];

    // The normalization E_1 contained in Omega (with room for the inner ball
    // of the radial piece) is assumed throughout.
    const std::vector<VecN> bd = bp.omega.boundary_points(bp.boundary_resolution);
    double r_in = std::numeric_limits<double>::infinity();
    double r_om = 0.0;
    double max_phi = -std::numeric_limits<double>::infinity();
    for (const VecN& xi : bd) {
        r_in = std::min(r_in, quad_form(bp.a, xi));
        r_om = std::max(r_om, quad_form(bp.a, xi));
        max_phi = std::max(max_phi, bp.phi(xi));
    }
    // r_A > 1 outside the body also gives |x| > 1/sqrt(a_n), the inner radius
    // the isotropic comparison piece needs.
    if (r_in <= 1.0)
        fail(Err::InvalidInput,
             "construct_barriers: the body must contain the unit ellipsoid of A (min r_A on "
             "the boundary is " +
                 std::to_string(r_in) + ")");

    // Route selection: supercritical phases run with eps0 = 0 (the rate is
    // then d(A, 0)); otherwise membership in the admissible family supplies
    // a positive eps0.
    if (classify(n, prob.theta).kind == PhaseKind::Supercritical) {
        out.eps0 = 0.0;
    } else {
        const auto eps = find_eps0(bp.a);
        if (!eps)
            fail(Err::NoAdmissibleEps, "construct_barriers: A not in A0 (d(A) = " +
                                           std::to_string(d_of(bp.a)) + ")");
        out.eps0 = *eps;
    }
    out.d_eff = d_eps(bp.a, out.eps0);
    // The shift integrals converge only when the profile tails decay faster
    // than r^-2; the tail exponent is min{d(A, eps0), beta} under a live
    // perturbation and d(A, eps0) without one.
    const double rate = (out.env.c_amp == 0.0) ? out.d_eff : std::min(out.d_eff, prob.beta);
    out.two_sided = rate > kTwoSidedCut;
    if (!out.two_sided && !bp.allow_one_sided)
        fail(Err::NoAdmissibleEps,
             "construct_barriers: A not in A0 (decay rate " + std::to_string(rate) +
                 " <= 2) and the one-sided run was not requested");

    // K with g(K lambda(A)) = theta + delta: the boundary quadratics then
    // oversolve the equation by the full perturbation budget.
    {
        auto gk = [&](double k) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += std::atan(k * a_eigs[i]);
            return s - (prob.theta + prob.delta);
        };
        double hi = 2.0;
        while (gk(hi) < 0.0) hi *= 2.0;
        out.k = find_root(gk, 1.0, hi, gk(1.0), gk(hi), 1e-12).value;
    }
    out.q = make_boundary_envelope(bp.omega, bp.phi, out.k, bp.a, bp.boundary_resolution,
                                   bp.exec);

    out.r1 = 1.25 * std::max(r_om, 1.0);
    out.r2 = 2.0 * out.r1;

    // alpha1 = min over xi and over the collar between the boundary and the
    // inner splice ring of the leaf quadratics.
    std::vector<VecN> collar = bd;
    for (const VecN& x :
         annulus_samples(bp.a, r_in * (1.0 + 1e-9), out.r1, std::max(bp.sample_count / 4, 512)))
        if (!bp.omega.contains(x)) collar.push_back(x);
    {
        double a1min = std::numeric_limits<double>::infinity();
        for (const VecN& x : collar)
            for (const BoundaryQuadratic& leaf : out.q.leaves) a1min = std::min(a1min, leaf(x));
        out.alpha1 = a1min;
    }

    ProfileDeps deps;
    deps.env = out.env;
    deps.eps0 = out.eps0;
    deps.r_max = bp.r_max;
    deps.ode = bp.ode;
    const double hl1 = underline_h(1.0, out.env);

    // Ring-ordering search for beta1: the radial piece must clear the
    // envelope on the outer splice ring.
    double q_max_r2 = -std::numeric_limits<double>::infinity();
    for (const VecN& x : ellipsoid_ring(bp.a, out.r2, 1000))
        q_max_r2 = std::max(q_max_r2, out.q(x));
    RadialProfile prof1;
    {
        bool found = false;
        for (int k = 0; k < 60 && !found; ++k) {
            out.beta1_hat = hl1 + 0.25 * std::pow(2.0, k);
            prof1 = integrate_h1(out.beta1_hat, deps);
            const RadialW u(out.alpha1, prof1, out.r1);
            if (u(out.r2) > q_max_r2 + kSeamTol) found = true;
        }
        if (!found)
            fail(Err::RootNotBracketed,
                 "construct_barriers: no initial slope clears the envelope on the outer ring");
    }

    // The shift constant is inverted on a tightened integration: the
    // adaptive starting segment reshuffles its steps as beta moves, which
    // puts noise of order rel_tol * c on the constant, and the inversion
    // tolerance must sit above that floor.
    ProfileDeps tight = deps;
    tight.ode.abs_tol = 1e-12;
    tight.ode.rel_tol = 1e-11;

    if (out.two_sided) {
        out.c_star =
            asymptotic_constant(RadialW(out.alpha1, integrate_h1(out.beta1_hat, tight), out.r1));

        // Supersolution scaffolding; everything except the level alpha2 is
        // independent of the prescribed constant.
        out.beta2 = 0.95 * overline_h(1.0, out.env);
        const RadialProfile prof2 = integrate_h2(out.beta2, deps);
        const RadialW wbar0(0.0, prof2, 1.0);
        const GenSymFunction wbar0_g = make_gensym(bp.a, wbar0);
        out.sup_report = check_supersolution(
            wbar0_g, prob, annulus_samples(bp.a, 1.0, 0.9 * bp.r_max, bp.sample_count),
            bp.exec);
        if (!out.sup_report.pass)
            fail(Err::Indeterminate,
                 "construct_barriers: no supersolution validity radius detected");
        // The ball B_r3 must contain both the validity ellipsoid E_r_bar and
        // the envelope region E_r2; every extra factor inflates the height
        // the isotropic piece has to reach on the outer ball, so the
        // enclosures are kept snug.
        out.r_bar = std::max(out.sup_report.r_bar, 1.05 * out.r2);
        out.r3 = 1.05 * out.r_bar / std::sqrt(a1);
        out.r4 = 1.5 * out.r3;

        const double mu2_val = mu2(out.beta2, deps);

        if (out.env.c_amp == 0.0) {
            // Unperturbed equation: the quadratic itself is the upper
            // barrier once it clears the envelope and the shift constant.
            out.quad_shortcut = true;
            double cq = -std::numeric_limits<double>::infinity();
            std::vector<VecN> band = collar;
            for (const VecN& x : annulus_samples(bp.a, out.r1, out.r2, 2000)) band.push_back(x);
            for (const VecN& x : band)
                cq = std::max(cq, out.q(x) - 0.5 * dot(x, bp.a.apply(x)));
            out.c_star2 = cq;
        } else {
            const double a_tilde = a_star(n, prob.theta - prob.delta);
            const double r03 = std::sqrt(a_tilde / an);
            const double m_off = wbar0(out.r_bar);
            const double wbar0_r4 = wbar0(std::sqrt(an) * out.r4);
            double q_max_b4 = -std::numeric_limits<double>::infinity();
            for (const VecN& x : euclidean_ring(n, out.r4, 1000))
                q_max_b4 = std::max(q_max_b4, out.q(x));

            const double r_max3 = std::max(bp.r_max, 4.0 * std::sqrt(a_tilde) * out.r4);
            RadialProfile prof3;
            double delta3 = 0.0;
            bool found = false;
            for (int k = 0; k < 60 && !found; ++k) {
                out.gamma3_hat = 1.0 + 0.5 * std::pow(2.0, k);
                prof3 = integrate_h3(out.gamma3_hat, prob, r03, r_max3, bp.ode);
                const RadialW wt0(0.0, prof3, r03);
                delta3 = wt0(std::sqrt(a_tilde) * out.r3);
                const double delta4 = wt0(std::sqrt(a_tilde) * out.r4);
                // Ring ordering against the generalized piece, and enough
                // height that the envelope stays under the radial piece on
                // the outer ball for every admissible level.
                found = (m_off + delta4 - delta3 >= wbar0_r4) &&
                        (delta4 >= q_max_b4 - max_phi);
            }
            if (!found)
                fail(Err::RootNotBracketed,
                     "construct_barriers: no radial slope satisfies the ball orderings");
            out.c_star2 = max_phi + delta3 + mu2_val;

            const double threshold = std::max(out.c_star, out.c_star2);
            if (bp.c <= threshold)
                fail(Err::BelowCStar, "construct_barriers: c = " + std::to_string(bp.c) +
                                          " must exceed " + std::to_string(threshold));

            const double alpha2 = bp.c - mu2_val;
            const double m_val = alpha2 + m_off;
            const double alpha3_hat = m_val - delta3;
            const GenSymFunction wtilde =
                make_gensym(SymMatrix::identity(n, a_tilde), RadialW(alpha3_hat, prof3, r03));
            const GenSymFunction wbar =
                make_gensym(bp.a, RadialW(alpha2, prof2, 1.0));
            out.upper = splice_sup(wtilde, wbar, out.r3, out.r4);
        }

        if (out.quad_shortcut) {
            const double threshold = std::max(out.c_star, out.c_star2);
            if (bp.c <= threshold)
                fail(Err::BelowCStar, "construct_barriers: c = " + std::to_string(bp.c) +
                                          " must exceed " + std::to_string(threshold));
            out.upper_quad = make_gensym(
                bp.a, RadialW(bp.c + 0.5, unit_profile(1.0, bp.r_max), 1.0));
        }

        // Shift-constant inversion for the lower barrier.
        {
            auto fz = [&](double b) {
                return asymptotic_constant(RadialW(out.alpha1, integrate_h1(b, tight), out.r1)) -
                       bp.c;
            };
            const double f_lo = out.c_star - bp.c;
            if (f_lo >= 0.0) {
                out.beta1_c = out.beta1_hat;  // c grazes the attainable minimum
            } else {
                double hi = out.beta1_hat;
                double f_hi = f_lo;
                for (int k = 0; k < 60 && f_hi <= 0.0; ++k) {
                    hi = out.beta1_hat + 0.5 * std::pow(2.0, k);
                    f_hi = fz(hi);
                }
                if (f_hi <= 0.0)
                    fail(Err::RootNotBracketed,
                         "construct_barriers: shift constant never reaches c");
                const double tol_c = std::max(1e-8, 2e-7 * std::fabs(bp.c));
                out.beta1_c = find_root(fz, out.beta1_hat, hi, f_lo, f_hi, tol_c).value;
            }
            prof1 = integrate_h1(out.beta1_c, tight);
        }
    } else {
        out.beta1_c = out.beta1_hat;
    }

    const GenSymFunction w_under = make_gensym(bp.a, RadialW(out.alpha1, prof1, out.r1));
    out.lower = splice_sub(out.q, w_under, out.r1, out.r2);

    out.sub_report = check_subsolution(
        w_under, prob, annulus_samples(bp.a, out.r1, 0.9 * bp.r_max, bp.sample_count), bp.exec);

    // Margin of the envelope piece: its phase oversolves by delta, so the
    // perturbation must stay inside the budget on the covered region.
    {
        double qm = std::numeric_limits<double>::infinity();
        for (const VecN& x : collar) qm = std::min(qm, prob.delta - prob.f(norm(x)));
        for (const VecN& x : annulus_samples(bp.a, out.r1, out.r2, 2000))
            qm = std::min(qm, prob.delta - prob.f(norm(x)));
        out.q_margin = qm;
    }

    if (out.two_sided) {
        auto upper_at = [&](const VecN& x) {
            return out.quad_shortcut ? (*out.upper_quad)(x) : (*out.upper)(x);
        };
        double gap = std::numeric_limits<double>::infinity();
        VecN worst;
        std::vector<VecN> sweep = collar;
        for (const VecN& x : annulus_samples(bp.a, out.r1, out.r2, bp.sample_count / 4))
            sweep.push_back(x);
        for (const VecN& x : annulus_samples(bp.a, out.r2, std::sqrt(an) * out.r4 * 1.1,
                                             bp.sample_count / 4))
            sweep.push_back(x);
        for (const VecN& x : annulus_samples(bp.a, std::sqrt(an) * out.r4 * 1.1, 0.9 * bp.r_max,
                                             bp.sample_count / 4))
            sweep.push_back(x);
        for (const VecN& x : sweep) {
            const double g = upper_at(x) - out.lower(x);
            if (g < gap) {
                gap = g;
                worst = x;
            }
        }
        out.sandwich_gap = gap;
        if (gap < -kSandwichTol)
            fail(Err::SandwichViolated,
                 "construct_barriers: lower barrier exceeds the upper barrier by " +
                     std::to_string(-gap));

        // Boundary clearance of the upper barrier.
        double bc = std::numeric_limits<double>::infinity();
        for (const VecN& xi : bd) bc = std::min(bc, upper_at(xi) - bp.phi(xi));
        if (bc < -kSandwichTol)
            fail(Err::SandwichViolated,
                 "construct_barriers: upper barrier dips below the boundary data");

        VecN far_pt(n);
        far_pt[n - 1] = 0.9 * bp.r_max / std::sqrt(an);
        out.closure_at_rmax = upper_at(far_pt) - out.lower(far_pt);
    }

    return out;
}

}  // namespace lmce
