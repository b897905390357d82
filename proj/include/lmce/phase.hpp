#pragma once

#include <optional>

#include "lmce/linalg.hpp"

namespace lmce {

// The scalar operator F(M) = sum_i arctan lambda_i(M), phase classification,
// and the decay-rate quantities d(A) and d(A, eps0) that govern barrier tails.

enum class PhaseKind { Subcritical, Critical, Supercritical };

struct PhaseClass {
    PhaseKind kind = PhaseKind::Subcritical;
    // theta >= (n-1)*pi/2, where the operator becomes concave; implies
    // supercritical.
    bool concave_range = false;
};

const char* phase_name(const PhaseClass& c);

// Problem data: dimension, phase, phase margin, and the radial perturbation
// f(x) = c_f * |x|^(-beta). The smoothness order m is carried as metadata.
struct PhaseProblem {
    int n = 3;
    double theta = 0.0;
    double delta = 0.0;
    double beta = 3.0;
    double c_f = 0.0;
    int m = 2;

    double f(double rho) const;

    // delta > 0, theta +- delta inside (0, n*pi/2), and for supercritical
    // problems theta - 2*delta stays above the critical phase.
    void validate() const;
};

// min(0.05, slack/4) with slack measured to the critical phase when theta is
// supercritical and to zero otherwise; both variants keep theta +- delta
// admissible.
double default_delta(int n, double theta);

double F_of(const SymMatrix& m);
PhaseClass classify(int n, double theta);
double a_star(int n, double theta);

// (1 + lambda_min^2)/lambda_max * sum_i lambda_i/(1 + lambda_i^2)
double d_of(const SymMatrix& a);
double d_of(const VecN& eigenvalues_ascending);

// ( a_n/(1+a_1^2) + eps0 * sum_{i>=2} a_i/(1+a_i^2) )^{-1} * sum_i a_i/(1+a_i^2);
// reduces to d_of at eps0 = 0.
double d_eps(const SymMatrix& a, double eps0);
double d_eps(const VecN& eigenvalues_ascending, double eps0);

// Largest eps0 in [0, 1] (up to bisection resolution) with
// d_eps(A, eps0) >= 2 + margin; nullopt when even eps0 = 0 fails.
std::optional<double> find_eps0(const SymMatrix& a, double margin = 0.05);

struct A0Certificate {
    bool member = false;
    bool positive_definite = false;
    double theta_of_a = 0.0;
    double d_value = 0.0;
};

// Membership in the admissible family: positive definite with d(A) > 2.
A0Certificate in_A0(const SymMatrix& a);

}  // namespace lmce
