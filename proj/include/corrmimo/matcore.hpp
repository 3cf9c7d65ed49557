#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "corrmimo/types.hpp"

namespace corrmimo {

/// Eigenpairs of a Hermitian matrix, eigenvalues sorted non-increasing,
/// eigenvector columns phase-fixed (first significant component real-positive).
struct HermitianEigen {
    RealVector eigenvalues;
    ComplexMatrix eigenvectors;
};

struct SvdResult {
    ComplexMatrix left;          // unitary U
    RealVector singular_values;  // non-negative, non-increasing
    ComplexMatrix right;         // unitary V, A = U diag(s) V^H
};

namespace detail {

/// Multiplies column j by the conjugate phase of its first component with
/// magnitude above tol * column norm. Returns that phase factor.
inline Complex fix_column_phase(ComplexMatrix& m, Eigen::Index j, double tol = 1e-12) {
    const double scale = m.col(j).norm();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double mag = std::abs(m(i, j));
        if (mag > tol * scale) {
            const Complex phase = m(i, j) / mag;
            m.col(j) *= std::conj(phase);
            return phase;
        }
    }
    return Complex{1.0, 0.0};
}

}  // namespace detail

inline HermitianEigen hermitian_eig(const ComplexMatrix& a) {
    require(a.rows() == a.cols(), "hermitian_eig: input must be square");
    require(all_finite(a), "hermitian_eig: input has non-finite entries");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    require((a - a.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
            "hermitian_eig: input is not Hermitian within 1e-12");

    const ComplexMatrix h = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
    require(solver.info() == Eigen::Success, "hermitian_eig: eigensolver failed");

    const Eigen::Index n = a.rows();
    HermitianEigen out;
    out.eigenvalues = RealVector(n);
    out.eigenvectors = ComplexMatrix(n, n);
    // Eigen returns ascending order; the standard ordering here is descending.
    for (Eigen::Index k = 0; k < n; ++k) {
        out.eigenvalues(k) = solver.eigenvalues()(n - 1 - k);
        out.eigenvectors.col(k) = solver.eigenvectors().col(n - 1 - k);
    }
    for (Eigen::Index k = 0; k < n; ++k) detail::fix_column_phase(out.eigenvectors, k);
    return out;
}

inline SvdResult svd(const ComplexMatrix& a) {
    require(all_finite(a), "svd: input has non-finite entries");
    Eigen::JacobiSVD<ComplexMatrix> solver(a, Eigen::ComputeFullU | Eigen::ComputeFullV);

    SvdResult out;
    out.left = solver.matrixU();
    out.right = solver.matrixV();
    out.singular_values = solver.singularValues();

    // Phase convention on V columns; paired U columns compensate so that
    // U diag(s) V^H is unchanged.
    const Eigen::Index paired = std::min(out.left.cols(), out.right.cols());
    const double smax = out.singular_values.size() > 0 ? out.singular_values(0) : 0.0;
    for (Eigen::Index k = 0; k < out.right.cols(); ++k) {
        const Complex phase = detail::fix_column_phase(out.right, k);
        if (k < paired && k < out.singular_values.size() && out.singular_values(k) > 1e-14 * smax)
            out.left.col(k) *= std::conj(phase);
    }
    for (Eigen::Index k = 0; k < out.left.cols(); ++k) {
        if (k >= out.singular_values.size() || out.singular_values(k) <= 1e-14 * smax)
            detail::fix_column_phase(out.left, k);
    }
    return out;
}

/// Numerical rank at threshold tol * sigma_max.
inline Eigen::Index numerical_rank(const SvdResult& s, double tol = 1e-10) {
    if (s.singular_values.size() == 0) return 0;
    const double cut = tol * s.singular_values(0);
    Eigen::Index r = 0;
    while (r < s.singular_values.size() && s.singular_values(r) > cut) ++r;
    return r;
}

/// lambda_k(compressed) <= lambda_k(full) + tol for every k up to the
/// compressed size (both sorted non-increasing).
inline bool eigenvalue_dominance(const RealVector& compressed, const RealVector& full,
                                 double tol = 1e-10) {
    require(compressed.size() <= full.size(), "eigenvalue_dominance: compressed spectrum longer");
    for (Eigen::Index k = 0; k < compressed.size(); ++k)
        if (compressed(k) > full(k) + tol) return false;
    return true;
}

/// Poincare separation: lambda_k(W^H A W) <= lambda_k(A) for orthonormal W.
inline bool poincare_check(const ComplexMatrix& a, const ComplexMatrix& w) {
    require(a.rows() == a.cols(), "poincare_check: A must be square");
    require(w.rows() == a.rows(), "poincare_check: W rows must match A");
    require(is_semiunitary(w, 1e-10), "poincare_check: W columns not orthonormal within 1e-10");

    const HermitianEigen ea = hermitian_eig(a);
    const HermitianEigen eb = hermitian_eig(ComplexMatrix(w.adjoint() * a * w));
    return eigenvalue_dominance(eb.eigenvalues, ea.eigenvalues);
}

/// det([[X, Y], [Z, W]]) = det(X - Y W^{-1} Z) det(W) for invertible W.
inline Complex block_det(const ComplexMatrix& x, const ComplexMatrix& y, const ComplexMatrix& z,
                         const ComplexMatrix& w) {
    const Eigen::Index n = x.rows();
    require(x.cols() == n && y.rows() == n && y.cols() == n && z.rows() == n && z.cols() == n &&
                w.rows() == n && w.cols() == n,
            "block_det: all blocks must be n x n");
    require(all_finite(x) && all_finite(y) && all_finite(z) && all_finite(w),
            "block_det: non-finite entries");

    Eigen::JacobiSVD<ComplexMatrix> ws(w);
    const double smax = ws.singularValues()(0);
    const double smin = ws.singularValues()(n - 1);
    if (!(smin > 0.0) || smax / smin >= 1e12)
        throw std::domain_error("block_det: W is singular (condition number >= 1e12)");

    Eigen::PartialPivLU<ComplexMatrix> lu(w);
    const ComplexMatrix schur = x - y * lu.solve(z);
    return schur.determinant() * lu.determinant();
}

}  // namespace corrmimo
