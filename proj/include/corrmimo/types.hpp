#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace corrmimo {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline bool all_finite(const ComplexMatrix& a) { return a.allFinite(); }
inline bool all_finite(const RealVector& a) { return a.allFinite(); }

/// Frobenius distance of `a` from `ref`, relative to ||ref|| (absolute if ref == 0).
inline double rel_error(const ComplexMatrix& a, const ComplexMatrix& ref) {
    const double denom = ref.norm();
    return denom > 0.0 ? (a - ref).norm() / denom : a.norm();
}

inline double unitarity_defect(const ComplexMatrix& u) {
    const Eigen::Index r = u.cols();
    return (u.adjoint() * u - ComplexMatrix::Identity(r, r)).cwiseAbs().maxCoeff();
}

inline bool is_semiunitary(const ComplexMatrix& u, double tol = 1e-10) {
    return unitarity_defect(u) <= tol;
}

inline bool is_non_increasing(const RealVector& v, double tol = 0.0) {
    for (Eigen::Index i = 0; i + 1 < v.size(); ++i)
        if (v(i) + tol < v(i + 1)) return false;
    return true;
}

inline RealVector sorted_descending(RealVector v) {
    std::sort(v.data(), v.data() + v.size(), std::greater<double>());
    return v;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

}  // namespace corrmimo
