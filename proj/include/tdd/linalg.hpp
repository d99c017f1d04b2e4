#pragma once

#include <Eigen/Dense>
#include <complex>

#include "tdd/errors.hpp"

namespace tdd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

// Real symmetric matrix; storage keeps entries(i,j) == entries(j,i) exactly.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(Matrix m, double asym_tol = 1e-12);

    static SymMatrix zero(Eigen::Index dim);
    static SymMatrix identity(Eigen::Index dim);
    static SymMatrix diagonal(const Vector& d);
    static SymMatrix scalar(double v);

    Eigen::Index dim() const { return m_.rows(); }
    const Matrix& mat() const { return m_; }
    double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

    double frobenius() const { return m_.norm(); }
    double spectral_norm() const;
    double min_eigenvalue() const;

    SymMatrix operator+(const SymMatrix& o) const;
    SymMatrix operator-(const SymMatrix& o) const;
    SymMatrix operator*(double s) const;
    // congruence C * this * C^T
    SymMatrix congruence(const Matrix& c) const;

private:
    Matrix m_;
};

// Real antisymmetric matrix; entries(i,j) == -entries(j,i) exactly.
class SkewMatrix {
public:
    SkewMatrix() = default;
    explicit SkewMatrix(Matrix m, double sym_tol = 1e-12);

    static SkewMatrix zero(Eigen::Index dim);

    Eigen::Index dim() const { return m_.rows(); }
    const Matrix& mat() const { return m_; }

private:
    Matrix m_;
};

// Unique PSD square root via symmetric eigendecomposition.  Eigenvalues in
// [-tol_eig, 0) are clamped to zero; below -tol_eig raises NotPSD.
// tol_eig < 0 selects the default 1e-10 * ||M||_2.
SymMatrix psd_sqrt(const SymMatrix& m, double tol_eig = -1.0);

// exp(t A) for skew-symmetric A; orthogonal to machine precision.
Matrix skew_exp(const SkewMatrix& a, double t);

// int_0^t exp(s A) ds, same eigenbasis as skew_exp.
Matrix skew_exp_integral(const SkewMatrix& a, double t);

struct SymplecticReport {
    bool ok = false;
    double orthogonality_residual = 0.0; // ||J^T J - 1||_F
    double square_residual = 0.0;        // ||J^2 + 1||_F
};

SymplecticReport check_symplectic(const Matrix& j, double tol = 1e-12);

// Canonical 2n x 2n block symplectic [[0,-1],[1,0]].
Matrix canonical_symplectic(Eigen::Index n);

inline void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) throw NonFinite(what);
}

} // namespace tdd
