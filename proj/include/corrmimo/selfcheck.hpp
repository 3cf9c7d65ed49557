#pragma once

#include "corrmimo/link.hpp"
#include "corrmimo/precoding.hpp"

namespace corrmimo::selfcheck {

/// Waterfilling by exhaustive active-set enumeration: try every candidate
/// mode count, keep the feasible assignment with all-positive powers. Kept
/// deliberately independent of the closed-form implementation it validates.
inline RealVector waterfill_enumeration(const RealVector& lambda, double rho) {
    const Eigen::Index n = lambda.size();
    for (Eigen::Index k = n; k >= 1; --k) {
        double inv_sum = 0.0;
        for (Eigen::Index i = 0; i < k; ++i) inv_sum += 1.0 / lambda(i);
        const double mu = (rho + inv_sum) / static_cast<double>(k);
        bool feasible = true;
        for (Eigen::Index i = 0; i < k; ++i)
            if (mu - 1.0 / lambda(i) < 0.0) feasible = false;
        if (k < n && mu - 1.0 / lambda(k) > 1e-15) feasible = false;  // next mode would activate
        if (!feasible) continue;
        RealVector powers = RealVector::Zero(n);
        for (Eigen::Index i = 0; i < k; ++i) powers(i) = mu - 1.0 / lambda(i);
        return powers;
    }
    return RealVector::Zero(n);
}

/// Definitional per-stream SINR at the linear MMSE filter output: signal
/// power over interference-plus-noise power of s_hat = G^H y.
inline RealVector definitional_sinr(const ComplexMatrix& h, const ComplexMatrix& f_effective) {
    const ComplexMatrix g = mmse_filters(h, f_effective);
    const ComplexMatrix mixing = g.adjoint() * h * f_effective;  // M x M
    const Eigen::Index m = f_effective.cols();
    RealVector out(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const double signal = std::norm(mixing(k, k));
        double interference = 0.0;
        for (Eigen::Index j = 0; j < m; ++j)
            if (j != k) interference += std::norm(mixing(k, j));
        const double noise = g.col(k).squaredNorm();
        out(k) = signal / (interference + noise);
    }
    return out;
}

/// Gaussian tail by adaptive Simpson quadrature of the density over [x, x+40].
inline double q_quadrature(double x) {
    const auto density = [](double t) {
        return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
    };
    const double hi = x + 40.0;
    const int steps = 40000;  // plenty for 1e-13 absolute at these ranges
    const double hstep = (hi - x) / steps;
    double acc = density(x) + density(hi);
    for (int i = 1; i < steps; ++i) acc += (i % 2 == 0 ? 2.0 : 4.0) * density(x + i * hstep);
    return acc * hstep / 3.0;
}

}  // namespace corrmimo::selfcheck
