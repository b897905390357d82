#include "lmce/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lmce {

namespace {

void check_dim(int dim) {
    if (dim < 1 || dim > kMaxDim)
        fail(Err::InvalidInput, "dimension " + std::to_string(dim) + " outside [1, " +
                                    std::to_string(kMaxDim) + "]");
}

void check_same(int a, int b) {
    if (a != b)
        fail(Err::InvalidInput,
             "dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}

// In-place Cholesky, lower triangle in packed storage. Returns false when a
// pivot fails to be positive (matrix not positive definite).
bool cholesky(int n, std::array<double, kMaxDim*(kMaxDim + 1) / 2>& a) {
    auto idx = [](int i, int j) { return static_cast<size_t>(i * (i + 1) / 2 + j); };
    for (int j = 0; j < n; ++j) {
        double d = a[idx(j, j)];
        for (int k = 0; k < j; ++k) d -= a[idx(j, k)] * a[idx(j, k)];
        if (d <= 0.0 || !std::isfinite(d)) return false;
        d = std::sqrt(d);
        a[idx(j, j)] = d;
        for (int i = j + 1; i < n; ++i) {
            double s = a[idx(i, j)];
            for (int k = 0; k < j; ++k) s -= a[idx(i, k)] * a[idx(j, k)];
            a[idx(i, j)] = s / d;
        }
    }
    return true;
}

}  // namespace

VecN::VecN(int dim) : n(dim) { check_dim(dim); }

VecN::VecN(std::initializer_list<double> xs) : n(static_cast<int>(xs.size())) {
    check_dim(n);
    int i = 0;
    for (double x : xs) v[static_cast<size_t>(i++)] = x;
}

VecN operator+(const VecN& a, const VecN& b) {
    check_same(a.n, b.n);
    VecN r(a.n);
    for (int i = 0; i < a.n; ++i) r[i] = a[i] + b[i];
    return r;
}

VecN operator-(const VecN& a, const VecN& b) {
    check_same(a.n, b.n);
    VecN r(a.n);
    for (int i = 0; i < a.n; ++i) r[i] = a[i] - b[i];
    return r;
}

VecN operator*(double s, const VecN& a) {
    VecN r(a.n);
    for (int i = 0; i < a.n; ++i) r[i] = s * a[i];
    return r;
}

double dot(const VecN& a, const VecN& b) {
    check_same(a.n, b.n);
    double s = 0.0;
    for (int i = 0; i < a.n; ++i) s += a[i] * b[i];
    return s;
}

double norm(const VecN& a) { return std::sqrt(dot(a, a)); }

MatN::MatN(int dim) : n(dim) { check_dim(dim); }

MatN MatN::identity(int dim) {
    MatN r(dim);
    for (int i = 0; i < dim; ++i) r.at(i, i) = 1.0;
    return r;
}

MatN matmul(const MatN& a, const MatN& b) {
    check_same(a.n, b.n);
    MatN r(a.n);
    for (int i = 0; i < a.n; ++i)
        for (int k = 0; k < a.n; ++k) {
            const double aik = a.at(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < a.n; ++j) r.at(i, j) += aik * b.at(k, j);
        }
    return r;
}

MatN transpose(const MatN& a) {
    MatN r(a.n);
    for (int i = 0; i < a.n; ++i)
        for (int j = 0; j < a.n; ++j) r.at(i, j) = a.at(j, i);
    return r;
}

VecN matvec(const MatN& a, const VecN& x) {
    check_same(a.n, x.n);
    VecN r(a.n);
    for (int i = 0; i < a.n; ++i) {
        double s = 0.0;
        for (int j = 0; j < a.n; ++j) s += a.at(i, j) * x[j];
        r[i] = s;
    }
    return r;
}

SymMatrix::SymMatrix(int dim) : n_(dim) { check_dim(dim); }

SymMatrix SymMatrix::identity(int dim, double scale) {
    SymMatrix r(dim);
    for (int i = 0; i < dim; ++i) r.set(i, i, scale);
    return r;
}

SymMatrix SymMatrix::diag(const VecN& d) {
    SymMatrix r(d.n);
    for (int i = 0; i < d.n; ++i) r.set(i, i, d[i]);
    return r;
}

SymMatrix SymMatrix::from_spectrum(const MatN& q, const VecN& lambda) {
    check_same(q.n, lambda.n);
    SymMatrix r(q.n);
    for (int i = 0; i < q.n; ++i)
        for (int j = 0; j <= i; ++j) {
            double s = 0.0;
            for (int k = 0; k < q.n; ++k) s += q.at(i, k) * lambda[k] * q.at(j, k);
            r.set(i, j, s);
        }
    return r;
}

double SymMatrix::operator()(int i, int j) const {
    if (i < j) std::swap(i, j);
    return a_[static_cast<size_t>(i * (i + 1) / 2 + j)];
}

void SymMatrix::set(int i, int j, double value) {
    if (i < j) std::swap(i, j);
    a_[static_cast<size_t>(i * (i + 1) / 2 + j)] = value;
}

void SymMatrix::add(int i, int j, double value) {
    if (i < j) std::swap(i, j);
    a_[static_cast<size_t>(i * (i + 1) / 2 + j)] += value;
}

VecN SymMatrix::apply(const VecN& x) const {
    check_same(n_, x.n);
    VecN r(n_);
    for (int i = 0; i < n_; ++i) {
        double s = 0.0;
        for (int j = 0; j < n_; ++j) s += (*this)(i, j) * x[j];
        r[i] = s;
    }
    return r;
}

double SymMatrix::trace() const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += (*this)(i, i);
    return s;
}

MatN SymMatrix::dense() const {
    MatN r(n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) r.at(i, j) = (*this)(i, j);
    return r;
}

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
    check_same(a.dim(), b.dim());
    SymMatrix r(a.dim());
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j <= i; ++j) r.set(i, j, a(i, j) + b(i, j));
    return r;
}

SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
    check_same(a.dim(), b.dim());
    SymMatrix r(a.dim());
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j <= i; ++j) r.set(i, j, a(i, j) - b(i, j));
    return r;
}

SymMatrix operator*(double s, const SymMatrix& a) {
    SymMatrix r(a.dim());
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j <= i; ++j) r.set(i, j, s * a(i, j));
    return r;
}

EigenDecomp eig_sym(const SymMatrix& a) {
    const int n = a.dim();
    if (n < 1) fail(Err::InvalidInput, "eig_sym on empty matrix");

    // Work on a dense copy; accumulate rotations into q.
    MatN w = a.dense();
    MatN q = MatN::identity(n);

    auto off_norm = [&]() {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) s += w.at(i, j) * w.at(i, j);
        return std::sqrt(2.0 * s);
    };

    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        const double off = off_norm();
        if (off < 1e-15 * (1.0 + std::fabs(a.trace()))) break;
        // Threshold: skip rotations that cannot reduce the off-diagonal mass.
        const double thresh = (sweep < 3) ? 0.2 * off / (n * n) : 0.0;
        for (int p = 0; p < n - 1; ++p) {
            for (int qq = p + 1; qq < n; ++qq) {
                const double apq = w.at(p, qq);
                if (std::fabs(apq) <= thresh) continue;
                const double app = w.at(p, p);
                const double aqq = w.at(qq, qq);
                if (std::fabs(apq) < 1e-300) continue;
                // Classic two-sided Jacobi rotation annihilating (p, qq).
                const double tau = (aqq - app) / (2.0 * apq);
                double t;
                if (tau >= 0.0)
                    t = 1.0 / (tau + std::sqrt(1.0 + tau * tau));
                else
                    t = -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double wkp = w.at(k, p);
                    const double wkq = w.at(k, qq);
                    w.at(k, p) = c * wkp - s * wkq;
                    w.at(k, qq) = s * wkp + c * wkq;
                }
                for (int k = 0; k < n; ++k) {
                    const double wpk = w.at(p, k);
                    const double wqk = w.at(qq, k);
                    w.at(p, k) = c * wpk - s * wqk;
                    w.at(qq, k) = s * wpk + c * wqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double qkp = q.at(k, p);
                    const double qkq = q.at(k, qq);
                    q.at(k, p) = c * qkp - s * qkq;
                    q.at(k, qq) = s * qkp + c * qkq;
                }
            }
        }
    }

    EigenDecomp dec;
    dec.n = n;
    dec.lambda = VecN(n);
    dec.q = MatN(n);
    std::array<int, kMaxDim> order{};
    for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    std::sort(order.begin(), order.begin() + n,
              [&](int i, int j) { return w.at(i, i) < w.at(j, j); });
    for (int j = 0; j < n; ++j) {
        const int src = order[static_cast<size_t>(j)];
        dec.lambda[j] = w.at(src, src);
        for (int i = 0; i < n; ++i) dec.q.at(i, j) = q.at(i, src);
    }
    return dec;
}

double quad_form(const SymMatrix& a, const VecN& x) {
    check_same(a.dim(), x.n);
    if (!is_positive_definite(a)) fail(Err::NotPositiveDefinite, "quad_form");
    double s = 0.0;
    for (int i = 0; i < a.dim(); ++i) {
        s += a(i, i) * x[i] * x[i];
        for (int j = 0; j < i; ++j) s += 2.0 * a(i, j) * x[i] * x[j];
    }
    // Roundoff can push a tiny positive value below zero near x = 0.
    return std::sqrt(std::max(s, 0.0));
}

bool is_positive_definite(const SymMatrix& a) {
    std::array<double, kMaxDim*(kMaxDim + 1) / 2> packed{};
    const int n = a.dim();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) packed[static_cast<size_t>(i * (i + 1) / 2 + j)] = a(i, j);
    return cholesky(n, packed);
}

VecN solve_spd(const SymMatrix& a, const VecN& b) {
    check_same(a.dim(), b.n);
    const int n = a.dim();
    std::array<double, kMaxDim*(kMaxDim + 1) / 2> l{};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j) l[static_cast<size_t>(i * (i + 1) / 2 + j)] = a(i, j);
    if (!cholesky(n, l)) fail(Err::NotPositiveDefinite, "solve_spd");
    auto idx = [](int i, int j) { return static_cast<size_t>(i * (i + 1) / 2 + j); };
    VecN y(n);
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= l[idx(i, k)] * y[k];
        y[i] = s / l[idx(i, i)];
    }
    VecN x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int k = i + 1; k < n; ++k) s -= l[idx(k, i)] * x[k];
        x[i] = s / l[idx(i, i)];
    }
    return x;
}

}  // namespace lmce
