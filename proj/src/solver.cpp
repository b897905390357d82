#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "lmce/error.hpp"
#include "lmce/solver.hpp"

namespace lmce {

namespace {

constexpr double kHalfPi = 1.5707963267948966192313216916398;

void check_stencil(const AnnularGrid& grid) {
    if (grid.nr < 2 || grid.ntheta < 4)
        fail(Err::StencilError, "residual: grid too coarse for the nine-point stencil");
}

double sup_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

}  // namespace

AnnularField residual(const AnnularField& u, const PhaseProblem& prob, const AnnularGrid& grid,
                      Exec exec) {
    check_stencil(grid);
    AnnularField res(grid);
    const int count = grid.interior_count();
    for_each_index(count, exec, [&](int k) {
        const int ring = 1 + k / grid.ntheta;
        const int j = k % grid.ntheta;
        const SymMatrix h = hessian_at(grid, u, ring, j);
        const VecN& x = grid.point(ring, j);
        res.at(grid.index(ring, j)) = F_of(h) - prob.theta - prob.f(norm(x));
    });
    return res;
}

AnnularField quadratic_init(const AnnularGrid& grid, const SymMatrix& a, double c,
                            const BoundaryData& phi) {
    AnnularField u(grid);
    for (int i = 0; i <= grid.nr; ++i)
        for (int j = 0; j < grid.ntheta; ++j) {
            const VecN& x = grid.point(i, j);
            u.at(grid.index(i, j)) = (i == 0) ? phi(x) : 0.5 * dot(x, a.apply(x)) + c;
        }
    return u;
}

NewtonResult newton_solve(const AnnularGrid& grid, const PhaseProblem& prob,
                          const BoundaryData& phi, const std::vector<double>& outer,
                          const AnnularField& init, const SolveOptions& opts) {
    check_stencil(grid);
    if (static_cast<int>(outer.size()) != grid.ntheta)
        fail(Err::InvalidInput, "newton_solve: outer data must carry one value per angle");
    if (static_cast<int>(init.v.size()) != grid.size())
        fail(Err::InvalidInput, "newton_solve: init field does not match the grid");

    NewtonResult out;
    out.u = init;
    for (int j = 0; j < grid.ntheta; ++j) {
        out.u.at(grid.index(0, j)) = phi(grid.point(0, j));
        out.u.at(grid.index(grid.nr, j)) = outer[static_cast<size_t>(j)];
    }

    const int nth = grid.ntheta;
    const int unknowns = grid.interior_count();

    auto interior_residual = [&](const AnnularField& f, std::vector<double>& r) {
        const AnnularField full = residual(f, prob, grid, opts.exec);
        r.resize(static_cast<size_t>(unknowns));
        for (int k = 0; k < unknowns; ++k)
            r[static_cast<size_t>(k)] = full.at(grid.index(1 + k / nth, k % nth));
    };

    std::vector<double> r;
    interior_residual(out.u, r);
    double rnorm = sup_norm(r);
    out.report.residual_history.push_back(rnorm);

    AnnularField best = out.u;
    double best_norm = rnorm;

    Eigen::SparseMatrix<double> jac(unknowns, unknowns);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(unknowns) * 9);
    // Per-row entries are precomputed in parallel, then concatenated in row
    // order so the assembled matrix does not depend on the thread count.
    std::vector<std::array<double, 9>> row_vals(static_cast<size_t>(unknowns));
    std::vector<std::array<int, 9>> row_cols(static_cast<size_t>(unknowns));

    for (int it = 0; it < opts.max_iter; ++it) {
        if (rnorm <= opts.tol) {
            out.report.converged = true;
            break;
        }

        for_each_index(unknowns, opts.exec, [&](int k) {
            const int ring = 1 + k / nth;
            const int j = k % nth;
            const SymMatrix h = hessian_at(grid, out.u, ring, j);
            const EigenDecomp ed = eig_sym(h);
            const auto& hw = grid.hess_w[static_cast<size_t>(grid.index(ring, j))];
            auto& vals = row_vals[static_cast<size_t>(k)];
            auto& cols = row_cols[static_cast<size_t>(k)];
            int slot = 0;
            for (int di = -1; di <= 1; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    const int ri = ring + di;
                    if (ri == 0 || ri == grid.nr) {  // Dirichlet neighbour, not an unknown
                        cols[static_cast<size_t>(slot)] = -1;
                        vals[static_cast<size_t>(slot++)] = 0.0;
                        continue;
                    }
                    SymMatrix w(2);
                    w.set(0, 0, hw[0][static_cast<size_t>(slot)]);
                    w.set(1, 0, hw[1][static_cast<size_t>(slot)]);
                    w.set(1, 1, hw[2][static_cast<size_t>(slot)]);
                    double entry = 0.0;
                    for (int e = 0; e < 2; ++e) {
                        const VecN q = {ed.q.at(0, e), ed.q.at(1, e)};
                        entry += dot(q, w.apply(q)) / (1.0 + ed.lambda[e] * ed.lambda[e]);
                    }
                    cols[static_cast<size_t>(slot)] = (ri - 1) * nth + grid.wrap(j + dj);
                    vals[static_cast<size_t>(slot++)] = entry;
                }
        });

        trips.clear();
        for (int k = 0; k < unknowns; ++k)
            for (int s = 0; s < 9; ++s)
                if (row_cols[static_cast<size_t>(k)][static_cast<size_t>(s)] >= 0)
                    trips.emplace_back(k, row_cols[static_cast<size_t>(k)][static_cast<size_t>(s)],
                                       row_vals[static_cast<size_t>(k)][static_cast<size_t>(s)]);
        jac.setFromTriplets(trips.begin(), trips.end());

        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(jac);
        if (lu.info() != Eigen::Success)
            fail(Err::SingularJacobian, "newton_solve: sparse factorization failed");
        Eigen::VectorXd rhs(unknowns);
        for (int k = 0; k < unknowns; ++k) rhs[k] = -r[static_cast<size_t>(k)];
        const Eigen::VectorXd delta = lu.solve(rhs);
        if (lu.info() != Eigen::Success)
            fail(Err::SingularJacobian, "newton_solve: sparse backsolve failed");

        double t = 1.0;
        AnnularField trial = out.u;
        std::vector<double> r_trial;
        double trial_norm = std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int half = 0; half < 30; ++half) {
            for (int k = 0; k < unknowns; ++k)
                trial.at(grid.index(1 + k / nth, k % nth)) =
                    out.u.at(grid.index(1 + k / nth, k % nth)) + t * delta[k];
            interior_residual(trial, r_trial);
            trial_norm = sup_norm(r_trial);
            if (trial_norm < rnorm * (1.0 - 1e-4 * t) || !opts.damping) {
                accepted = true;
                break;
            }
            t *= 0.5;
            ++out.report.backtracks;
        }
        if (!accepted) break;  // stalled line search; report the best iterate

        out.u = trial;
        r = r_trial;
        rnorm = trial_norm;
        out.report.residual_history.push_back(rnorm);
        ++out.report.iterations;
        if (rnorm < best_norm) {
            best = out.u;
            best_norm = rnorm;
        }
        if (rnorm <= opts.tol) out.report.converged = true;
    }

    if (rnorm <= opts.tol) out.report.converged = true;
    if (!out.report.converged) out.u = best;
    return out;
}

double RadialSolution::value(double rho) const { return ode_eval(trace, rho, 0); }

double RadialSolution::slope(double rho) const { return ode_eval(trace, rho, 1); }

RadialSolution radial_solve(const PhaseProblem& prob, double inner_r, double inner_value,
                            double inner_slope, double outer_r, const OdeOptions& ode) {
    if (inner_r <= 0.0) fail(Err::InvalidInput, "radial_solve: inner radius must be positive");
    if (outer_r <= inner_r) fail(Err::InvalidInput, "radial_solve: outer radius inside inner");

    const int n = prob.n;
    auto arg_of = [&](double rho, double slope) {
        return prob.theta + prob.f(rho) - (n - 1) * std::atan(slope / rho);
    };
    if (std::fabs(arg_of(inner_r, inner_slope)) >= kHalfPi - 1e-12)
        fail(Err::PhaseEscape, "radial_solve: initial slope already at the principal-branch edge");

    const OdeRhs rhs = [&](double rho, const OdeState& y, OdeState& dy) {
        const double arg = arg_of(rho, y[1]);
        if (std::fabs(arg) >= kHalfPi - 1e-9) return false;
        dy[0] = y[1];
        dy[1] = std::tan(arg);
        return true;
    };

    RadialSolution sol;
    sol.n = n;
    sol.r_lo = inner_r;
    sol.r_hi = outer_r;
    OdeState y0{};
    y0[0] = inner_value;
    y0[1] = inner_slope;
    sol.trace = integrate_ode(rhs, 2, inner_r, outer_r, y0, ode);
    return sol;
}

SandwichCheck verify_sandwich(const AnnularField& u, const AnnularGrid& grid,
                              const std::function<double(const VecN&)>& under,
                              const std::function<double(const VecN&)>& over) {
    SandwichCheck rep;
    const double h = grid.max_cell();
    rep.tol = 10.0 * h * h;
    rep.min_under = std::numeric_limits<double>::infinity();
    rep.min_over = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= grid.nr; ++i)
        for (int j = 0; j < grid.ntheta; ++j) {
            const VecN& x = grid.point(i, j);
            const double val = u.at(grid.index(i, j));
            const double mu = val - under(x);
            const double mo = over(x) - val;
            if (mu < rep.min_under) {
                rep.min_under = mu;
                rep.worst_under_point = x;
            }
            if (mo < rep.min_over) {
                rep.min_over = mo;
                rep.worst_over_point = x;
            }
        }
    rep.pass = rep.min_under >= -rep.tol && rep.min_over >= -rep.tol;
    return rep;
}

void window_samples(const AnnularGrid& grid, const AnnularField& u, double r_lo, double r_hi,
                    std::vector<VecN>& xs, std::vector<double>& us) {
    for (int i = 0; i <= grid.nr; ++i)
        for (int j = 0; j < grid.ntheta; ++j) {
            const VecN& x = grid.point(i, j);
            const double r = norm(x);
            if (r >= r_lo && r <= r_hi) {
                xs.push_back(x);
                us.push_back(u.at(grid.index(i, j)));
            }
        }
}

}  // namespace lmce
