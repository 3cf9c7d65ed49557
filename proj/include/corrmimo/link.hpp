#pragma once

#include <numbers>

#include "corrmimo/matcore.hpp"
#include "corrmimo/precoding.hpp"
#include "corrmimo/types.hpp"

namespace corrmimo {

/// Constellation constants for P = alpha * Q(beta * sqrt(SINR)).
struct Constellation {
    double alpha = 1.0;
    double beta = std::numbers::sqrt2;

    static Constellation bpsk() { return {1.0, std::numbers::sqrt2}; }
    static Constellation qpsk() { return {2.0, 1.0}; }
    static Constellation custom(double alpha, double beta) {
        require(alpha > 0.0 && beta > 0.0, "Constellation: alpha and beta must be positive");
        return {alpha, beta};
    }
};

/// Gaussian tail probability via the complementary error function.
inline double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

struct QBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// exp(-x^2/2) / (x sqrt(2 pi)) * {1 - 1/x^2, 1}; the lower bound is
/// informative only for x > 1.
inline QBounds q_bounds(double x) {
    require(x > 0.0, "q_bounds: x must be positive");
    const double envelope = std::exp(-0.5 * x * x) / (x * std::sqrt(2.0 * std::numbers::pi));
    return {envelope * (1.0 - 1.0 / (x * x)), envelope};
}

namespace detail {

/// (I_M + F^H H^H H F)^{-1} for a fully scaled effective F: the shared MSE
/// matrix behind SINR, MSE and mutual information.
inline ComplexMatrix mse_matrix(const ComplexMatrix& h, const ComplexMatrix& f_effective) {
    require(h.cols() == f_effective.rows(), "link: channel/precoder dimensions mismatch");
    const Eigen::Index m = f_effective.cols();
    const ComplexMatrix hf = h * f_effective;
    const ComplexMatrix gram = hf.adjoint() * hf;
    return (ComplexMatrix::Identity(m, m) + gram).inverse();
}

}  // namespace detail

/// Per-stream linear MMSE filters: column k recovers stream k from y as
/// g_k^H y. Takes the fully scaled effective F (the sqrt(rho/M) factor lives
/// inside F, never applied twice).
inline ComplexMatrix mmse_filters(const ComplexMatrix& h, const ComplexMatrix& f_effective) {
    require(h.cols() == f_effective.rows(), "mmse_filters: dimensions mismatch");
    const Eigen::Index nr = h.rows();
    const ComplexMatrix hf = h * f_effective;
    const ComplexMatrix cov = hf * hf.adjoint() + ComplexMatrix::Identity(nr, nr);
    return cov.ldlt().solve(hf);
}

inline RealVector sinr_of_effective(const ComplexMatrix& h, const ComplexMatrix& f_effective) {
    const ComplexMatrix b = detail::mse_matrix(h, f_effective);
    RealVector out(b.rows());
    for (Eigen::Index k = 0; k < b.rows(); ++k) out(k) = 1.0 / b(k, k).real() - 1.0;
    return out.cwiseMax(0.0);
}

inline RealVector sinr(const ComplexMatrix& h, const Precoder& p) {
    return sinr_of_effective(h, p.effective());
}

inline RealVector mse_of_effective(const ComplexMatrix& h, const ComplexMatrix& f_effective) {
    const ComplexMatrix b = detail::mse_matrix(h, f_effective);
    RealVector out(b.rows());
    for (Eigen::Index k = 0; k < b.rows(); ++k) out(k) = b(k, k).real();
    return out;
}

inline RealVector mse(const ComplexMatrix& h, const Precoder& p) {
    return mse_of_effective(h, p.effective());
}

/// Gaussian-input mutual information log2 det(I_M + F^H H^H H F) in bits,
/// evaluated through Hermitian eigenvalues for stability.
inline double mutual_info_of_effective(const ComplexMatrix& h, const ComplexMatrix& f_effective) {
    require(h.cols() == f_effective.rows(), "mutual_info: dimensions mismatch");
    const ComplexMatrix hf = h * f_effective;
    const ComplexMatrix gram = hf.adjoint() * hf;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(gram);
    double bits = 0.0;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
        bits += std::log2(1.0 + std::max(0.0, es.eigenvalues()(k)));
    return bits;
}

inline double mutual_info(const ComplexMatrix& h, const Precoder& p) {
    return mutual_info_of_effective(h, p.effective());
}

inline RealVector stream_error_prob(const RealVector& sinr_values, const Constellation& c) {
    require(c.alpha > 0.0 && c.beta > 0.0, "stream_error_prob: invalid constellation");
    require(sinr_values.minCoeff() >= 0.0, "stream_error_prob: SINR must be non-negative");
    RealVector p(sinr_values.size());
    for (Eigen::Index k = 0; k < p.size(); ++k)
        p(k) = std::clamp(c.alpha * q_function(c.beta * std::sqrt(sinr_values(k))), 0.0, 1.0);
    return p;
}

/// P(at least one stream in error) = 1 - prod(1 - p_k).
inline double error_prob_any(const RealVector& p) {
    double prod = 1.0;
    for (Eigen::Index k = 0; k < p.size(); ++k) {
        require(p(k) >= 0.0 && p(k) <= 1.0, "error_prob_any: probabilities must lie in [0, 1]");
        prod *= 1.0 - p(k);
    }
    return 1.0 - prod;
}

inline double error_prob_avg(const RealVector& p) {
    for (Eigen::Index k = 0; k < p.size(); ++k)
        require(p(k) >= 0.0 && p(k) <= 1.0, "error_prob_avg: probabilities must lie in [0, 1]");
    return p.mean();
}

/// Every receiver-side quantity for one (H, F) pair.
struct LinkMetrics {
    RealVector sinr;
    RealVector mse;
    double mutual_info = 0.0;  // bits
    RealVector p_stream;
    double p_any = 0.0;
    double p_avg = 0.0;
};

inline LinkMetrics link_metrics(const ComplexMatrix& h, const Precoder& p,
                                const Constellation& c) {
    const ComplexMatrix f = p.effective();
    const ComplexMatrix b = detail::mse_matrix(h, f);

    LinkMetrics out;
    const Eigen::Index m = b.rows();
    out.mse = RealVector(m);
    out.sinr = RealVector(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        out.mse(k) = b(k, k).real();
        out.sinr(k) = 1.0 / out.mse(k) - 1.0;
    }
    out.sinr = out.sinr.cwiseMax(0.0);
    out.mutual_info = mutual_info_of_effective(h, f);
    out.p_stream = stream_error_prob(out.sinr, c);
    out.p_any = error_prob_any(out.p_stream);
    out.p_avg = error_prob_avg(out.p_stream);
    return out;
}

}  // namespace corrmimo
