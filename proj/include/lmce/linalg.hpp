#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>

#include "lmce/error.hpp"

namespace lmce {

// Hessians and coefficient matrices in this library live in R^n with
// 2 <= n <= 8, so everything is stack-allocated at the maximum dimension.
inline constexpr int kMaxDim = 8;

struct VecN {
    int n = 0;
    std::array<double, kMaxDim> v{};

    VecN() = default;
    explicit VecN(int dim);
    VecN(std::initializer_list<double> xs);

    double& operator[](int i) { return v[static_cast<size_t>(i)]; }
    double operator[](int i) const { return v[static_cast<size_t>(i)]; }
};

VecN operator+(const VecN& a, const VecN& b);
VecN operator-(const VecN& a, const VecN& b);
VecN operator*(double s, const VecN& a);
double dot(const VecN& a, const VecN& b);
double norm(const VecN& a);

// Dense square matrix, used for eigenvector frames and rotations.
struct MatN {
    int n = 0;
    std::array<double, kMaxDim * kMaxDim> m{};

    MatN() = default;
    explicit MatN(int dim);
    static MatN identity(int dim);

    double& at(int i, int j) { return m[static_cast<size_t>(i * kMaxDim + j)]; }
    double at(int i, int j) const { return m[static_cast<size_t>(i * kMaxDim + j)]; }
};

MatN matmul(const MatN& a, const MatN& b);
MatN transpose(const MatN& a);
VecN matvec(const MatN& a, const VecN& x);

// Symmetric matrix stored as the packed lower triangle, row by row.
class SymMatrix {
  public:
    SymMatrix() = default;
    explicit SymMatrix(int dim);

    static SymMatrix identity(int dim, double scale = 1.0);
    static SymMatrix diag(const VecN& d);
    // Assembles Q diag(lambda) Q^T from a frame and spectrum.
    static SymMatrix from_spectrum(const MatN& q, const VecN& lambda);

    int dim() const { return n_; }
    double operator()(int i, int j) const;
    void set(int i, int j, double value);
    void add(int i, int j, double value);

    VecN apply(const VecN& x) const;
    double trace() const;
    MatN dense() const;

  private:
    int n_ = 0;
    std::array<double, kMaxDim*(kMaxDim + 1) / 2> a_{};
};

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b);
SymMatrix operator-(const SymMatrix& a, const SymMatrix& b);
SymMatrix operator*(double s, const SymMatrix& a);

struct EigenDecomp {
    int n = 0;
    VecN lambda;  // ascending
    MatN q;       // column j is the eigenvector of lambda[j]
};

// Cyclic Jacobi with threshold sweeping. Small dimensions make this both
// robust and fast; no external dependency is involved.
EigenDecomp eig_sym(const SymMatrix& a);

// sqrt(x^T A x) for positive definite A.
double quad_form(const SymMatrix& a, const VecN& x);

// Cholesky-based positive definiteness test and linear solve.
bool is_positive_definite(const SymMatrix& a);
VecN solve_spd(const SymMatrix& a, const VecN& b);

}  // namespace lmce
