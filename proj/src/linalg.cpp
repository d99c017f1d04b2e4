#include "tdd/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <cmath>
#include <functional>

namespace tdd {

SymMatrix::SymMatrix(Matrix m, double asym_tol) {
    if (m.rows() != m.cols()) throw DimensionMismatch("SymMatrix must be square");
    require_finite(m, "SymMatrix entries");
    const double scale = std::max(1.0, m.norm());
    if ((m - m.transpose()).norm() > asym_tol * scale)
        throw DimensionMismatch("matrix is not symmetric");
    m_ = 0.5 * (m + m.transpose().eval());
}

SymMatrix SymMatrix::zero(Eigen::Index dim) { return SymMatrix(Matrix::Zero(dim, dim)); }
SymMatrix SymMatrix::identity(Eigen::Index dim) { return SymMatrix(Matrix::Identity(dim, dim)); }

SymMatrix SymMatrix::diagonal(const Vector& d) {
    Matrix m = Matrix::Zero(d.size(), d.size());
    m.diagonal() = d;
    return SymMatrix(m);
}

SymMatrix SymMatrix::scalar(double v) {
    Matrix m(1, 1);
    m(0, 0) = v;
    return SymMatrix(m);
}

double SymMatrix::spectral_norm() const {
    if (dim() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double SymMatrix::min_eigenvalue() const {
    if (dim() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

SymMatrix SymMatrix::operator+(const SymMatrix& o) const {
    if (dim() != o.dim()) throw DimensionMismatch("SymMatrix +");
    return SymMatrix(Matrix(m_ + o.m_));
}

SymMatrix SymMatrix::operator-(const SymMatrix& o) const {
    if (dim() != o.dim()) throw DimensionMismatch("SymMatrix -");
    return SymMatrix(Matrix(m_ - o.m_));
}

SymMatrix SymMatrix::operator*(double s) const { return SymMatrix(Matrix(s * m_)); }

SymMatrix SymMatrix::congruence(const Matrix& c) const {
    if (c.cols() != dim()) throw DimensionMismatch("congruence dims");
    return SymMatrix(Matrix(c * m_ * c.transpose()));
}

SkewMatrix::SkewMatrix(Matrix m, double sym_tol) {
    if (m.rows() != m.cols()) throw DimensionMismatch("SkewMatrix must be square");
    require_finite(m, "SkewMatrix entries");
    const double scale = std::max(1.0, m.norm());
    if ((m + m.transpose()).norm() > sym_tol * scale)
        throw DimensionMismatch("matrix is not antisymmetric");
    m_ = 0.5 * (m - m.transpose().eval());
}

SkewMatrix SkewMatrix::zero(Eigen::Index dim) { return SkewMatrix(Matrix::Zero(dim, dim)); }

SymMatrix psd_sqrt(const SymMatrix& m, double tol_eig) {
    // diagonal matrices (field grids, zero Dirac weights) skip the eigensolver
    {
        const Matrix& mm = m.mat();
        double offdiag = 0.0, maxabs = 0.0, mindiag = 0.0;
        for (Eigen::Index j = 0; j < mm.cols(); ++j)
            for (Eigen::Index i = 0; i < mm.rows(); ++i) {
                if (i != j)
                    offdiag = std::max(offdiag, std::abs(mm(i, j)));
                else {
                    maxabs = std::max(maxabs, std::abs(mm(i, i)));
                    mindiag = std::min(mindiag, mm(i, i));
                }
            }
        if (offdiag == 0.0) {
            if (tol_eig < 0.0) tol_eig = 1e-10 * maxabs;
            if (mindiag < -tol_eig)
                throw NotPSD("eigenvalue " + std::to_string(mindiag) + " below -tol_eig = " +
                             std::to_string(-tol_eig));
            Matrix s = Matrix::Zero(mm.rows(), mm.cols());
            for (Eigen::Index i = 0; i < mm.rows(); ++i)
                s(i, i) = mm(i, i) > 0.0 ? std::sqrt(mm(i, i)) : 0.0;
            return SymMatrix(std::move(s));
        }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(m.mat());
    if (es.info() != Eigen::Success) throw NonFinite("psd_sqrt eigendecomposition failed");
    Vector ev = es.eigenvalues();
    const double spec = ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0;
    if (tol_eig < 0.0) tol_eig = 1e-10 * spec;
    Vector root(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) < -tol_eig)
            throw NotPSD("eigenvalue " + std::to_string(ev(i)) + " below -tol_eig = " +
                         std::to_string(-tol_eig));
        root(i) = ev(i) > 0.0 ? std::sqrt(ev(i)) : 0.0;
    }
    Matrix s = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
    return SymMatrix(std::move(s), 1e-9);
}

namespace {

// Skew A = -i V D V^dagger with iA Hermitian, D real.
struct SkewEigen {
    Eigen::SelfAdjointEigenSolver<CMatrix> es;
    explicit SkewEigen(const SkewMatrix& a)
        : es(CMatrix(Complex(0.0, 1.0) * a.mat().cast<Complex>())) {
        if (es.info() != Eigen::Success) throw NonFinite("skew eigendecomposition failed");
    }
    Matrix apply(const std::function<Complex(double)>& g) const {
        const CMatrix& v = es.eigenvectors();
        CVector gd(es.eigenvalues().size());
        for (Eigen::Index i = 0; i < gd.size(); ++i) gd(i) = g(es.eigenvalues()(i));
        CMatrix r = v * gd.asDiagonal() * v.adjoint();
        return r.real();
    }
};

} // namespace

Matrix skew_exp(const SkewMatrix& a, double t) {
    SkewEigen se(a);
    // A has eigenvalue -i d for each real eigenvalue d of iA, so exp(tA) -> exp(-i t d).
    Matrix q = se.apply([t](double d) { return std::exp(Complex(0.0, -t * d)); });
    require_finite(q, "skew_exp result");
    return q;
}

Matrix skew_exp_integral(const SkewMatrix& a, double t) {
    SkewEigen se(a);
    Matrix q = se.apply([t](double d) -> Complex {
        // int_0^t exp(-i s d) ds
        if (std::abs(d) < 1e-300) return Complex(t, 0.0);
        const Complex iu(0.0, 1.0);
        return (1.0 - std::exp(-iu * (t * d))) / (iu * d);
    });
    require_finite(q, "skew_exp_integral result");
    return q;
}

SymplecticReport check_symplectic(const Matrix& j, double tol) {
    if (j.rows() != j.cols()) throw DimensionMismatch("check_symplectic expects a square matrix");
    SymplecticReport r;
    const Eigen::Index n = j.rows();
    if (n > 256) {
        // large operators (field grids): work on the sparsity pattern
        Eigen::SparseMatrix<double> sp(n, n);
        std::vector<Eigen::Triplet<double>> trip;
        for (Eigen::Index c = 0; c < n; ++c)
            for (Eigen::Index i = 0; i < n; ++i)
                if (j(i, c) != 0.0) trip.emplace_back(i, c, j(i, c));
        sp.setFromTriplets(trip.begin(), trip.end());
        Eigen::SparseMatrix<double> eye(n, n);
        eye.setIdentity();
        r.orthogonality_residual =
            Eigen::SparseMatrix<double>(sp.transpose() * sp - eye).norm();
        r.square_residual = Eigen::SparseMatrix<double>(sp * sp + eye).norm();
    } else {
        r.orthogonality_residual = (j.transpose() * j - Matrix::Identity(n, n)).norm();
        r.square_residual = (j * j + Matrix::Identity(n, n)).norm();
    }
    r.ok = r.orthogonality_residual <= tol && r.square_residual <= tol;
    return r;
}

Matrix canonical_symplectic(Eigen::Index n) {
    Matrix j = Matrix::Zero(2 * n, 2 * n);
    j.topRightCorner(n, n) = -Matrix::Identity(n, n);
    j.bottomLeftCorner(n, n) = Matrix::Identity(n, n);
    return j;
}

} // namespace tdd
