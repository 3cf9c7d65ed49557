#pragma once

#include <variant>
#include <vector>

#include "corrmimo/rng.hpp"
#include "corrmimo/types.hpp"

namespace corrmimo {

/// Separable (Kronecker) correlation: entry variances Lambda_r(i) * Lambda_t(j) / rho_c.
struct SeparableModel {
    ComplexMatrix u_t;     // N_t x N_t unitary
    ComplexMatrix u_r;     // N_r x N_r unitary
    RealVector lambda_t;   // non-increasing, non-negative, sums to rho_c
    RealVector lambda_r;   // non-increasing, non-negative, sums to rho_c
};

/// Canonical (beamspace) correlation: H = U_r H_ind U_t^H with independent
/// entries of variance sigma2(i, j); column sums non-increasing.
struct CanonicalModel {
    ComplexMatrix u_t;
    ComplexMatrix u_r;
    RealMatrix variance_profile;  // N_r x N_t, entries >= 0
};

using ChannelModel = std::variant<SeparableModel, CanonicalModel>;

struct ChannelRealization {
    ComplexMatrix h;      // N_r x N_t
    ComplexMatrix h_ind;  // h = u_r * h_ind * u_t^H
};

inline Eigen::Index tx_dim(const ChannelModel& model) {
    return std::visit([](const auto& m) { return m.u_t.rows(); }, model);
}

inline Eigen::Index rx_dim(const ChannelModel& model) {
    return std::visit([](const auto& m) { return m.u_r.rows(); }, model);
}

inline void validate_model(const SeparableModel& m) {
    require(m.u_t.rows() == m.u_t.cols() && m.u_r.rows() == m.u_r.cols(),
            "model: u_t/u_r must be square");
    require(m.lambda_t.size() == m.u_t.rows(), "model: lambda_t length mismatch");
    require(m.lambda_r.size() == m.u_r.rows(), "model: lambda_r length mismatch");
    require(is_semiunitary(m.u_t) && is_semiunitary(m.u_r), "model: u_t/u_r must be unitary");
    require(is_non_increasing(m.lambda_t, 1e-12) && m.lambda_t.minCoeff() >= -1e-12,
            "model: lambda_t must be non-increasing and non-negative");
    require(is_non_increasing(m.lambda_r, 1e-12) && m.lambda_r.minCoeff() >= -1e-12,
            "model: lambda_r must be non-increasing and non-negative");
    const double st = m.lambda_t.sum(), sr = m.lambda_r.sum();
    require(st > 0.0, "model: lambda_t must carry positive total power");
    require(std::abs(st - sr) <= 1e-9 * st,
            "model: sum(lambda_t) must equal sum(lambda_r) (channel power consistency)");
}

inline void validate_model(const CanonicalModel& m) {
    require(m.u_t.rows() == m.u_t.cols() && m.u_r.rows() == m.u_r.cols(),
            "model: u_t/u_r must be square");
    require(m.variance_profile.rows() == m.u_r.rows() && m.variance_profile.cols() == m.u_t.rows(),
            "model: variance_profile dimensions mismatch");
    require(is_semiunitary(m.u_t) && is_semiunitary(m.u_r), "model: u_t/u_r must be unitary");
    require(m.variance_profile.minCoeff() >= 0.0, "model: variance_profile entries must be >= 0");
    const RealVector col_sums = m.variance_profile.colwise().sum();
    require(is_non_increasing(col_sums, 1e-12),
            "model: variance_profile column sums must be non-increasing");
    require(m.variance_profile.sum() > 0.0, "model: variance_profile must carry positive power");
}

inline void validate_model(const ChannelModel& model) {
    std::visit([](const auto& m) { validate_model(m); }, model);
}

/// Per-entry variances sigma2(i, j); rank-one Lambda_r Lambda_t^T / rho_c in
/// the separable case.
inline RealMatrix variance_profile_of(const ChannelModel& model) {
    if (const auto* s = std::get_if<SeparableModel>(&model)) {
        const double rho_c = s->lambda_t.sum();
        return (s->lambda_r * s->lambda_t.transpose()) / rho_c;
    }
    return std::get<CanonicalModel>(model).variance_profile;
}

/// Transmit covariance eigenvalues (column power), non-increasing.
inline RealVector transmit_eigenvalues(const ChannelModel& model) {
    if (const auto* s = std::get_if<SeparableModel>(&model)) return s->lambda_t;
    return std::get<CanonicalModel>(model).variance_profile.colwise().sum();
}

/// Receive covariance eigenvalues sorted non-increasing (row power).
inline RealVector receive_eigenvalues(const ChannelModel& model) {
    if (const auto* s = std::get_if<SeparableModel>(&model)) return s->lambda_r;
    return sorted_descending(std::get<CanonicalModel>(model).variance_profile.rowwise().sum());
}

inline double channel_power(const ChannelModel& model) { return transmit_eigenvalues(model).sum(); }

inline const ComplexMatrix& tx_basis(const ChannelModel& model) {
    return std::visit([](const auto& m) -> const ComplexMatrix& { return m.u_t; }, model);
}

inline const ComplexMatrix& rx_basis(const ChannelModel& model) {
    return std::visit([](const auto& m) -> const ComplexMatrix& { return m.u_r; }, model);
}

inline ComplexMatrix transmit_covariance(const ChannelModel& model) {
    const ComplexMatrix& u = tx_basis(model);
    return u * transmit_eigenvalues(model).asDiagonal() * u.adjoint();
}

inline ComplexMatrix receive_covariance(const ChannelModel& model) {
    const ComplexMatrix& u = rx_basis(model);
    RealVector row_power;
    if (const auto* s = std::get_if<SeparableModel>(&model))
        row_power = s->lambda_r;
    else
        row_power = std::get<CanonicalModel>(model).variance_profile.rowwise().sum();
    return u * row_power.asDiagonal() * u.adjoint();
}

/// Derived second-order statistics view.
struct ChannelStats {
    double rho_c = 0.0;
    double gamma_r = 0.0;  // rho_c / N_r
    ComplexMatrix sigma_t;
    ComplexMatrix sigma_r;
    RealVector gamma_t;  // per-column power
};

inline ChannelStats stats_of(const ChannelModel& model) {
    ChannelStats s;
    s.rho_c = channel_power(model);
    s.gamma_r = s.rho_c / static_cast<double>(rx_dim(model));
    s.sigma_t = transmit_covariance(model);
    s.sigma_r = receive_covariance(model);
    s.gamma_t = transmit_eigenvalues(model);
    return s;
}

/// One Rayleigh draw: H_ind(i, j) ~ CN(0, sigma2_ij), column-major order so
/// separable and rank-one canonical models produce identical samples from
/// identical rng streams.
inline ChannelRealization sample(const ChannelModel& model, Rng& rng) {
    const RealMatrix profile = variance_profile_of(model);
    const Eigen::Index nr = profile.rows(), nt = profile.cols();
    ChannelRealization out;
    out.h_ind = ComplexMatrix(nr, nt);
    for (Eigen::Index j = 0; j < nt; ++j)
        for (Eigen::Index i = 0; i < nr; ++i) {
            const double var = profile(i, j);
            out.h_ind(i, j) = var > 0.0 ? rng.next_cgaussian(var) : Complex{0.0, 0.0};
        }
    const ComplexMatrix& ut = tx_basis(model);
    const ComplexMatrix& ur = rx_basis(model);
    const bool identity_bases = ut.isIdentity(1e-15) && ur.isIdentity(1e-15);
    out.h = identity_bases ? out.h_ind : ComplexMatrix(ur * out.h_ind * ut.adjoint());
    return out;
}

/// M_t = product of the m dominant transmit eigenvalues.
inline double matching_metric_tx(const ChannelModel& model, Eigen::Index m) {
    const RealVector lt = transmit_eigenvalues(model);
    require(m >= 1 && m <= lt.size(), "matching_metric_tx: m out of range");
    double prod = 1.0;
    for (Eigen::Index i = 0; i < m; ++i) prod *= lt(i);
    return prod;
}

/// M_r = sum of squared receive eigenvalues.
inline double matching_metric_rx(const ChannelModel& model) {
    return receive_eigenvalues(model).squaredNorm();
}

enum class UnitaryChoice { identity, seeded_random };

/// Matched channel: rank-m transmit spectrum with equal dominant eigenvalues,
/// flat receive spectrum.
inline SeparableModel make_matched(Eigen::Index n_t, Eigen::Index n_r, Eigen::Index m,
                                   double rho_c, Rng& rng,
                                   UnitaryChoice unitaries = UnitaryChoice::identity) {
    require(m >= 1 && m <= n_t, "make_matched: need 1 <= m <= n_t");
    require(rho_c > 0.0, "make_matched: rho_c must be positive");
    SeparableModel model;
    model.lambda_t = RealVector::Zero(n_t);
    for (Eigen::Index i = 0; i < m; ++i) model.lambda_t(i) = rho_c / static_cast<double>(m);
    model.lambda_r = RealVector::Constant(n_r, rho_c / static_cast<double>(n_r));
    if (unitaries == UnitaryChoice::seeded_random) {
        model.u_t = random_unitary(rng, n_t);
        model.u_r = random_unitary(rng, n_r);
    } else {
        model.u_t = ComplexMatrix::Identity(n_t, n_t);
        model.u_r = ComplexMatrix::Identity(n_r, n_r);
    }
    validate_model(model);
    return model;
}

/// Geometric decay profile for mismatched channels. decay = lambda(1) / lambda(n);
/// decay 1 gives the flat (i.i.d.) spectrum; large decay concentrates power on
/// the first mode while keeping full rank.
struct MismatchProfile {
    double decay_t = 1e3;
    double decay_r = 1e3;
};

namespace detail {

inline RealVector geometric_spectrum(Eigen::Index n, double decay, double total) {
    RealVector v(n);
    if (n == 1) {
        v(0) = total;
        return v;
    }
    const double r = std::pow(decay, -1.0 / static_cast<double>(n - 1));
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = std::pow(r, static_cast<double>(i));
        sum += v(i);
    }
    return v * (total / sum);
}

}  // namespace detail

inline SeparableModel make_mismatched(Eigen::Index n_t, Eigen::Index n_r, Eigen::Index m,
                                      double rho_c, const MismatchProfile& profile, Rng& rng,
                                      UnitaryChoice unitaries = UnitaryChoice::identity) {
    require(m >= 1 && m <= n_t, "make_mismatched: need 1 <= m <= n_t");
    require(rho_c > 0.0, "make_mismatched: rho_c must be positive");
    require(std::isfinite(profile.decay_t) && profile.decay_t >= 1.0 &&
                std::isfinite(profile.decay_r) && profile.decay_r >= 1.0,
            "make_mismatched: profile must keep rank(lambda_t) >= m (finite decay >= 1)");
    SeparableModel model;
    model.lambda_t = detail::geometric_spectrum(n_t, profile.decay_t, rho_c);
    model.lambda_r = detail::geometric_spectrum(n_r, profile.decay_r, rho_c);
    if (unitaries == UnitaryChoice::seeded_random) {
        model.u_t = random_unitary(rng, n_t);
        model.u_r = random_unitary(rng, n_r);
    } else {
        model.u_t = ComplexMatrix::Identity(n_t, n_t);
        model.u_r = ComplexMatrix::Identity(n_r, n_r);
    }
    validate_model(model);
    return model;
}

/// Family of transmit spectra whose matching metric covers
/// (M_max * 10^-span_decades, M_max], M_max = (rho_c/m)^m, approximately
/// log-uniformly: interpolates between the matched and a steep geometric
/// profile and bisects the interpolation parameter per target. Output sorted
/// by M_t ascending, strictly increasing.
inline std::vector<RealVector> matching_sweep_family(Eigen::Index n_t, Eigen::Index m,
                                                     double rho_c, int count, Rng& rng,
                                                     double span_decades = 6.0) {
    require(count >= 1, "matching_sweep_family: count must be >= 1");
    require(m >= 1 && m <= n_t, "matching_sweep_family: need 1 <= m <= n_t");
    require(rho_c > 0.0 && span_decades > 0.0, "matching_sweep_family: bad parameters");

    RealVector matched = RealVector::Zero(n_t);
    for (Eigen::Index i = 0; i < m; ++i) matched(i) = rho_c / static_cast<double>(m);
    const double m_max = std::pow(rho_c / static_cast<double>(m), static_cast<double>(m));
    const double m_min = m_max * std::pow(10.0, -span_decades);

    const auto metric = [m](const RealVector& lt) {
        double p = 1.0;
        for (Eigen::Index i = 0; i < m; ++i) p *= lt(i);
        return p;
    };

    // Steep endpoint: decay chosen so the interpolation reaches below m_min.
    double decay = 10.0;
    RealVector steep = detail::geometric_spectrum(n_t, decay, rho_c);
    for (int guard = 0; guard < 400 && metric(steep) > m_min / 10.0; ++guard) {
        decay *= 4.0;
        steep = detail::geometric_spectrum(n_t, decay, rho_c);
    }
    require(metric(steep) <= m_min, "matching_sweep_family: could not reach requested span");

    std::vector<RealVector> family;
    family.reserve(static_cast<std::size_t>(count));
    const double log_lo = std::log10(m_min), log_hi = std::log10(m_max);
    for (int i = 0; i < count; ++i) {
        double frac = count == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        if (i > 0 && i + 1 < count) {
            const double bin = 1.0 / static_cast<double>(count - 1);
            frac += (rng.next_double() - 0.5) * 0.6 * bin;
        }
        const double target = std::pow(10.0, log_lo + frac * (log_hi - log_lo));

        double t_lo = 0.0, t_hi = 1.0;  // metric decreases from m_max toward the steep end
        for (int it = 0; it < 200; ++it) {
            const double t = 0.5 * (t_lo + t_hi);
            const RealVector lt = (1.0 - t) * matched + t * steep;
            if (metric(lt) > target)
                t_lo = t;
            else
                t_hi = t;
        }
        family.push_back((1.0 - 0.5 * (t_lo + t_hi)) * matched + 0.5 * (t_lo + t_hi) * steep);
    }

    std::sort(family.begin(), family.end(),
              [&](const RealVector& a, const RealVector& b) { return metric(a) < metric(b); });
    std::vector<RealVector> dedup;
    for (auto& lt : family) {
        if (dedup.empty() || metric(lt) > metric(dedup.back()) * (1.0 + 1e-12))
            dedup.push_back(std::move(lt));
    }
    return dedup;
}

/// Separable model around a swept transmit spectrum with flat receive spectrum.
inline SeparableModel sweep_model(const RealVector& lambda_t, Eigen::Index n_r) {
    SeparableModel model;
    model.lambda_t = lambda_t;
    const double rho_c = lambda_t.sum();
    model.lambda_r = RealVector::Constant(n_r, rho_c / static_cast<double>(n_r));
    model.u_t = ComplexMatrix::Identity(lambda_t.size(), lambda_t.size());
    model.u_r = ComplexMatrix::Identity(n_r, n_r);
    validate_model(model);
    return model;
}

}  // namespace corrmimo
