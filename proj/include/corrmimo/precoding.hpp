#pragma once

#include "corrmimo/channel.hpp"
#include "corrmimo/majorization.hpp"
#include "corrmimo/matcore.hpp"
#include "corrmimo/types.hpp"

namespace corrmimo {

/// Linear precoder F = sqrt(rho/M) * v_f * diag(lambda_f)^{1/2} * rotation.
/// v_f is N_t x M semiunitary, lambda_f the power shares with trace <= M,
/// rotation an extra M x M unitary (identity except for the Schur-convex
/// fixed-power structure, which needs the trailing mixing stage).
struct Precoder {
    ComplexMatrix v_f;
    RealVector lambda_f;
    ComplexMatrix rotation;
    double rho = 0.0;

    Eigen::Index streams() const { return v_f.cols(); }

    ComplexMatrix effective() const {
        const double scale = std::sqrt(rho / static_cast<double>(streams()));
        ComplexMatrix f = scale * v_f * lambda_f.cwiseSqrt().asDiagonal();
        if (!rotation.isIdentity(1e-15)) f = f * rotation;
        return f;
    }
};

struct WaterfillResult {
    Eigen::Index n_h = 0;   // active modes
    double mu_h = 0.0;      // water level
    RealVector lambda_wf;   // powers, sum rho, zero beyond n_h
};

/// Waterfilling over positive channel-Gram eigenvalues: n_h is the largest k
/// with sum_{i<=k} (lambda_i - lambda_k)/(lambda_i lambda_k) <= rho, and
/// lambda_wf(i) = rho/n_h + (1/n_h) sum_{j<=n_h} 1/lambda_j - 1/lambda_i.
inline WaterfillResult waterfill(const RealVector& lambda, double rho) {
    require(lambda.size() >= 1, "waterfill: empty eigenvalue list");
    require(rho > 0.0, "waterfill: rho must be positive");
    require(lambda.minCoeff() > 0.0, "waterfill: eigenvalues must be positive");
    require(is_non_increasing(lambda, 1e-12), "waterfill: eigenvalues must be non-increasing");

    const Eigen::Index n = lambda.size();
    Eigen::Index n_h = 1;
    for (Eigen::Index k = n; k >= 1; --k) {
        double cond = 0.0;
        for (Eigen::Index i = 0; i < k; ++i)
            cond += (lambda(i) - lambda(k - 1)) / (lambda(i) * lambda(k - 1));
        if (cond <= rho) {
            n_h = k;
            break;
        }
    }

    double inv_sum = 0.0;
    for (Eigen::Index i = 0; i < n_h; ++i) inv_sum += 1.0 / lambda(i);
    const double mu = (rho + inv_sum) / static_cast<double>(n_h);

    WaterfillResult out;
    out.n_h = n_h;
    out.mu_h = mu;
    out.lambda_wf = RealVector::Zero(n);
    for (Eigen::Index i = 0; i < n_h; ++i) out.lambda_wf(i) = mu - 1.0 / lambda(i);
    return out;
}

namespace detail {

inline SvdResult svd_with_rank(const ComplexMatrix& h, Eigen::Index m, const char* who) {
    const SvdResult s = svd(h);
    if (numerical_rank(s) < m)
        throw std::domain_error(std::string(who) + ": channel rank below stream count");
    return s;
}

}  // namespace detail

/// Waterfilling along the m dominant right singular vectors (perfect CSI,
/// unconstrained power shaping). lambda_f carries (M/rho) * lambda_wf so the
/// trace convention Tr(Lambda_F) <= M holds while trace(F F^H) = rho.
inline Precoder perfect_unconstrained(const SvdResult& s, Eigen::Index m, double rho) {
    require(rho > 0.0, "perfect_unconstrained: rho must be positive");
    if (numerical_rank(s) < m)
        throw std::domain_error("perfect_unconstrained: channel rank below stream count");
    RealVector gram_eigs(m);
    for (Eigen::Index i = 0; i < m; ++i) gram_eigs(i) = s.singular_values(i) * s.singular_values(i);
    const WaterfillResult wf = waterfill(gram_eigs, rho);

    Precoder p;
    p.v_f = s.right.leftCols(m);
    p.lambda_f = (static_cast<double>(m) / rho) * wf.lambda_wf;
    p.rotation = ComplexMatrix::Identity(m, m);
    p.rho = rho;
    return p;
}

inline Precoder perfect_unconstrained(const ComplexMatrix& h, Eigen::Index m, double rho) {
    return perfect_unconstrained(detail::svd_with_rank(h, m, "perfect_unconstrained"), m, rho);
}

/// Dominant right singular vectors with uniform power (perfect CSI benchmark
/// for Schur-concave objectives).
inline Precoder perfect_semiunitary(const SvdResult& s, Eigen::Index m, double rho) {
    require(rho > 0.0, "perfect_semiunitary: rho must be positive");
    if (numerical_rank(s) < m)
        throw std::domain_error("perfect_semiunitary: channel rank below stream count");
    Precoder p;
    p.v_f = s.right.leftCols(m);
    p.lambda_f = RealVector::Ones(m);
    p.rotation = ComplexMatrix::Identity(m, m);
    p.rho = rho;
    return p;
}

inline Precoder perfect_semiunitary(const ComplexMatrix& h, Eigen::Index m, double rho) {
    return perfect_semiunitary(detail::svd_with_rank(h, m, "perfect_semiunitary"), m, rho);
}

/// Dominant singular vectors rotated so every stream sees the same MSE. The
/// per-mode MSE vector is majorized by any rearrangement onto the constant
/// mean, so the constant-modulus unitary from the majorization construction
/// equalizes exactly.
inline Precoder perfect_equalized(const SvdResult& s, Eigen::Index m, double rho) {
    require(rho > 0.0, "perfect_equalized: rho must be positive");
    if (numerical_rank(s) < m)
        throw std::domain_error("perfect_equalized: channel rank below stream count");

    RealVector mode_mse(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const double gram = s.singular_values(k) * s.singular_values(k);
        mode_mse(k) = 1.0 / (1.0 + rho / static_cast<double>(m) * gram);
    }
    const RealVector target = RealVector::Constant(m, mode_mse.mean());
    const UnitaryStochasticPair pair = unitary_stochastic_from_majorization(
        OrderedVector::from(target), OrderedVector::from(mode_mse));

    Precoder p;
    p.v_f = s.right.leftCols(m) * pair.gamma;
    p.lambda_f = RealVector::Ones(m);
    p.rotation = ComplexMatrix::Identity(m, m);
    p.rho = rho;
    return p;
}

inline Precoder perfect_equalized(const ComplexMatrix& h, Eigen::Index m, double rho) {
    return perfect_equalized(detail::svd_with_rank(h, m, "perfect_equalized"), m, rho);
}

enum class PrecoderObjective { schur_concave, schur_convex };

/// Fixed power shaping along the dominant singular vectors; the Schur-convex
/// variant appends the equalizing unitary after the power stage.
inline Precoder perfect_fixed(const SvdResult& s, Eigen::Index m, double rho,
                              const RealVector& lambda_fixed, PrecoderObjective objective) {
    require(rho > 0.0, "perfect_fixed: rho must be positive");
    require(lambda_fixed.size() == m, "perfect_fixed: lambda_fixed length must equal m");
    require(lambda_fixed.minCoeff() >= 0.0, "perfect_fixed: lambda_fixed must be non-negative");
    require(lambda_fixed.sum() <= static_cast<double>(m) + 1e-10,
            "perfect_fixed: trace(lambda_fixed) must not exceed m");
    if (numerical_rank(s) < m)
        throw std::domain_error("perfect_fixed: channel rank below stream count");

    Precoder p;
    p.v_f = s.right.leftCols(m);
    p.lambda_f = lambda_fixed;
    p.rotation = objective == PrecoderObjective::schur_convex ? constant_modulus_unitary(m)
                                                              : ComplexMatrix::Identity(m, m);
    p.rho = rho;
    return p;
}

inline Precoder perfect_fixed(const ComplexMatrix& h, Eigen::Index m, double rho,
                              const RealVector& lambda_fixed, PrecoderObjective objective) {
    return perfect_fixed(detail::svd_with_rank(h, m, "perfect_fixed"), m, rho, lambda_fixed,
                         objective);
}

namespace detail {

inline void check_stat_rank(const ChannelModel& model, Eigen::Index m, const char* who) {
    const RealVector lt = transmit_eigenvalues(model);
    require(m >= 1 && m <= lt.size(), std::string(who) + ": m out of range");
    Eigen::Index rank = 0;
    const double cut = 1e-12 * std::max(lt(0), 1e-300);
    for (Eigen::Index i = 0; i < lt.size(); ++i)
        if (lt(i) > cut) ++rank;
    if (rank < m) throw std::domain_error(std::string(who) + ": rank(lambda_t) below stream count");
}

}  // namespace detail

/// F_semi: m dominant eigenvectors of the transmit covariance, uniform power.
inline Precoder stat_semiunitary(const ChannelModel& model, Eigen::Index m, double rho) {
    require(rho > 0.0, "stat_semiunitary: rho must be positive");
    detail::check_stat_rank(model, m, "stat_semiunitary");
    Precoder p;
    p.v_f = tx_basis(model).leftCols(m);
    p.lambda_f = RealVector::Ones(m);
    p.rotation = ComplexMatrix::Identity(m, m);
    p.rho = rho;
    return p;
}

/// Threshold SNR below which the fixed statistical precoder loads power
/// proportionally to the transmit eigenvalues.
inline double snr_threshold(const ChannelModel& model, Eigen::Index m, double alpha) {
    require(alpha > 1.0, "snr_threshold: alpha must exceed 1");
    const RealVector lt = transmit_eigenvalues(model);
    require(m >= 1 && m <= lt.size(), "snr_threshold: m out of range");
    require(lt(m - 1) > 0.0, "snr_threshold: lambda_t(m) must be positive");
    return alpha * static_cast<double>(m) / lt(m - 1);
}

/// F_fixed: statistical directions with power proportional to the dominant
/// transmit eigenvalues below SNR_T and uniform at or above it.
inline Precoder stat_fixed(const ChannelModel& model, Eigen::Index m, double rho, double alpha) {
    require(rho > 0.0, "stat_fixed: rho must be positive");
    require(alpha > 1.0, "stat_fixed: alpha must exceed 1");
    detail::check_stat_rank(model, m, "stat_fixed");

    Precoder p = stat_semiunitary(model, m, rho);
    if (rho < snr_threshold(model, m, alpha)) {
        const RealVector lt = transmit_eigenvalues(model);
        const double head = lt.head(m).sum();
        p.lambda_f = static_cast<double>(m) * lt.head(m) / head;
    }
    return p;
}

struct StatPowerOptions {
    Eigen::Index batch = 2000;
    double step = 0.0;  // 0 selects the default 0.1 / rho
    double tol = 1e-6;
    int max_iters = 10000;
};

struct StatPowerResult {
    RealVector lambda;
    double objective = 0.0;  // nats, sample average
    bool converged = false;
    int iterations = 0;
};

namespace detail {

/// Euclidean projection onto { lambda >= 0, sum(lambda) <= budget }.
inline RealVector project_power(RealVector v, double budget) {
    RealVector clipped = v.cwiseMax(0.0);
    if (clipped.sum() <= budget) return clipped;
    RealVector sorted = sorted_descending(clipped);
    double cumsum = 0.0, tau = 0.0;
    for (Eigen::Index i = 0; i < sorted.size(); ++i) {
        cumsum += sorted(i);
        const double cand = (cumsum - budget) / static_cast<double>(i + 1);
        if (sorted(i) - cand > 0.0) tau = cand;
    }
    return (clipped.array() - tau).cwiseMax(0.0).matrix();
}

}  // namespace detail

/// Sample-average maximization of E[log det(I + (rho/M) H~ Lambda H~^H)] over
/// diagonal Lambda >= 0 with Tr(Lambda) <= M, by projected gradient ascent on
/// a batch of principal-submatrix draws fixed up front.
inline StatPowerResult optimize_stat_power(const ChannelModel& model, Eigen::Index m, double rho,
                                           const StatPowerOptions& options, Rng& rng) {
    require(options.batch >= 100, "optimize_stat_power: batch must be >= 100");
    require(rho > 0.0, "optimize_stat_power: rho must be positive");
    detail::check_stat_rank(model, m, "optimize_stat_power");

    const RealMatrix profile = variance_profile_of(model);
    const Eigen::Index nr = profile.rows();
    const double c = rho / static_cast<double>(m);

    // Gram matrices of the first m columns of H_ind (transmit eigenvalue order).
    std::vector<ComplexMatrix> grams;
    grams.reserve(static_cast<std::size_t>(options.batch));
    for (Eigen::Index b = 0; b < options.batch; ++b) {
        ComplexMatrix cols(nr, m);
        for (Eigen::Index j = 0; j < m; ++j)
            for (Eigen::Index i = 0; i < nr; ++i) {
                const double var = profile(i, j);
                cols(i, j) = var > 0.0 ? rng.next_cgaussian(var) : Complex{0.0, 0.0};
            }
        grams.push_back(cols.adjoint() * cols);
    }

    const auto objective = [&](const RealVector& lam) {
        double total = 0.0;
        for (const auto& g : grams) {
            const ComplexMatrix inner =
                ComplexMatrix::Identity(m, m) + c * lam.asDiagonal() * g;
            total += std::log(std::abs(inner.determinant()));
        }
        return total / static_cast<double>(grams.size());
    };
    const auto gradient = [&](const RealVector& lam) {
        RealVector grad = RealVector::Zero(m);
        for (const auto& g : grams) {
            const ComplexMatrix inner =
                ComplexMatrix::Identity(m, m) + c * lam.asDiagonal() * g;
            const ComplexMatrix prod = g * inner.inverse();
            for (Eigen::Index k = 0; k < m; ++k) grad(k) += c * prod(k, k).real();
        }
        return RealVector(grad / static_cast<double>(grams.size()));
    };

    const double budget = static_cast<double>(m);
    const double base_step = options.step > 0.0 ? options.step : 0.1 / rho;
    RealVector lam = RealVector::Ones(m);
    double f = objective(lam);

    StatPowerResult res;
    res.lambda = lam;
    res.objective = f;
    int iter = 0;
    for (; iter < options.max_iters; ++iter) {
        const RealVector grad = gradient(lam);
        const RealVector probe = detail::project_power(lam + base_step * grad, budget);
        if ((probe - lam).norm() / base_step < options.tol) {
            res.converged = true;
            break;
        }
        double step = base_step;
        bool accepted = false;
        for (int half = 0; half < 40; ++half) {
            const RealVector cand = detail::project_power(lam + step * grad, budget);
            const double fc = objective(cand);
            if (fc >= f) {
                lam = cand;
                f = fc;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            res.converged = true;  // no ascent direction left at any step size
            break;
        }
    }
    res.lambda = lam;
    res.objective = f;
    res.iterations = iter;
    return res;
}

}  // namespace corrmimo
