#pragma once

#include <optional>
#include <string>
#include <vector>

#include "corrmimo/channel.hpp"
#include "corrmimo/link.hpp"
#include "corrmimo/mc.hpp"
#include "corrmimo/precoding.hpp"

namespace corrmimo {

enum class SchemeKind {
    perf_unconst,
    perf_semi,
    perf_equalized,
    perf_fixed,
    stat_semi,
    stat_fixed,
};

inline const char* to_string(SchemeKind k) {
    switch (k) {
        case SchemeKind::perf_unconst: return "perf_unconst";
        case SchemeKind::perf_semi: return "perf_semi";
        case SchemeKind::perf_equalized: return "perf_equalized";
        case SchemeKind::perf_fixed: return "perf_fixed";
        case SchemeKind::stat_semi: return "stat_semi";
        case SchemeKind::stat_fixed: return "stat_fixed";
    }
    return "unknown";
}

inline SchemeKind scheme_from_string(const std::string& s) {
    if (s == "perf_unconst") return SchemeKind::perf_unconst;
    if (s == "perf_semi") return SchemeKind::perf_semi;
    if (s == "perf_equalized") return SchemeKind::perf_equalized;
    if (s == "perf_fixed") return SchemeKind::perf_fixed;
    if (s == "stat_semi") return SchemeKind::stat_semi;
    if (s == "stat_fixed") return SchemeKind::stat_fixed;
    throw std::invalid_argument("unknown scheme: " + s);
}

struct DeltaOptions {
    Constellation constellation = Constellation::qpsk();
    std::int64_t trials = 10000;
    std::uint64_t seed = 1;
    double alpha = 2.0;          // threshold parameter for the fixed-power schemes
    double denom_guard = 1e-9;   // per-draw denominator cutoff for ratio estimators
};

/// Relative-difference metrics between a benchmark and a test scheme, all
/// evaluated on shared channel draws. delta_i/delta_i1/delta_i2 are ratios of
/// expectations split at the perfect semiunitary intermediate; the tilde and
/// error/MSE metrics are expectations of per-draw ratios with denominator
/// guards (discard counts reported).
struct DeltaReport {
    MCEstimate delta_i;
    MCEstimate delta_i1;
    MCEstimate delta_i2;
    MCEstimate delta_i_tilde2;
    MCEstimate delta_p;      // per-stream-average error probability form
    MCEstimate delta_p_any;  // at-least-one-stream form
    MCEstimate delta_mse;
    std::vector<MCEstimate> delta_sinr;

    MCEstimate benchmark_info_bits;
    MCEstimate test_info_bits;
    MCEstimate benchmark_p_avg;
    MCEstimate test_p_avg;

    std::int64_t discarded_tilde2 = 0;
    std::int64_t discarded_p = 0;
    std::int64_t discarded_p_any = 0;
    std::int64_t discarded_mse = 0;
};

namespace detail {

struct SchemeEval {
    double info_bits = 0.0;
    double p_avg = 0.0;
    double p_any = 0.0;
    RealVector mse;
    RealVector sinr;
};

class SchemeEvaluator {
  public:
    SchemeEvaluator(const ChannelModel& model, Eigen::Index m, double rho, double alpha)
        : model_(model), m_(m), rho_(rho), alpha_(alpha) {}

    SchemeEval operator()(SchemeKind kind, const ChannelRealization& real,
                          std::optional<SvdResult>& svd_cache, const Constellation& c) const {
        const Precoder p = build(kind, real, svd_cache);
        const LinkMetrics lm = link_metrics(real.h, p, c);
        return {lm.mutual_info, lm.p_avg, lm.p_any, lm.mse, lm.sinr};
    }

  private:
    Precoder build(SchemeKind kind, const ChannelRealization& real,
                   std::optional<SvdResult>& svd_cache) const {
        switch (kind) {
            case SchemeKind::stat_semi: return stat_semiunitary(model_, m_, rho_);
            case SchemeKind::stat_fixed: return stat_fixed(model_, m_, rho_, alpha_);
            default: break;
        }
        if (!svd_cache) svd_cache = svd(real.h);
        switch (kind) {
            case SchemeKind::perf_unconst: return perfect_unconstrained(*svd_cache, m_, rho_);
            case SchemeKind::perf_semi: return perfect_semiunitary(*svd_cache, m_, rho_);
            case SchemeKind::perf_equalized: return perfect_equalized(*svd_cache, m_, rho_);
            case SchemeKind::perf_fixed: {
                // fixed perfect-CSI shaping reuses the statistical power profile
                const Precoder stat = stat_fixed(model_, m_, rho_, alpha_);
                return perfect_fixed(*svd_cache, m_, rho_, stat.lambda_f,
                                     PrecoderObjective::schur_concave);
            }
            default: break;
        }
        throw std::logic_error("unreachable scheme kind");
    }

    const ChannelModel& model_;
    Eigen::Index m_;
    double rho_;
    double alpha_;
};

/// Ratio of expectations mean(d) / mean(s) with paired delta-method stderr.
inline MCEstimate ratio_of_means(const std::vector<double>& d, const std::vector<double>& s) {
    MCEstimate e;
    e.trials = static_cast<std::int64_t>(d.size());
    if (d.empty()) return e;
    double dm = 0.0, sm = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        dm += d[i];
        sm += s[i];
    }
    dm /= static_cast<double>(d.size());
    sm /= static_cast<double>(s.size());
    if (sm <= 0.0) throw std::domain_error("estimate_delta: test-scheme expectation not positive");
    e.mean = dm / sm;
    if (d.size() > 1) {
        double ss = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            const double r = d[i] - e.mean * s[i];
            ss += r * r;
        }
        const double var = ss / static_cast<double>(d.size() - 1);
        e.std_error = std::sqrt(var / static_cast<double>(d.size())) / sm;
    }
    return e;
}

inline MCEstimate guarded_ratio_mean(const std::vector<double>& num,
                                     const std::vector<double>& den, double guard,
                                     std::int64_t& discarded) {
    std::vector<double> samples;
    samples.reserve(num.size());
    for (std::size_t i = 0; i < num.size(); ++i) {
        if (den[i] >= guard)
            samples.push_back(num[i] / den[i]);
        else
            ++discarded;
    }
    return mc_from_samples(samples);
}

}  // namespace detail

inline DeltaReport estimate_delta(const ChannelModel& model, Eigen::Index m, double rho,
                                  SchemeKind benchmark, SchemeKind test,
                                  const DeltaOptions& options) {
    require(options.trials >= 1, "estimate_delta: trials must be >= 1");
    validate_model(model);

    const detail::SchemeEvaluator eval(model, m, rho, options.alpha);
    const std::int64_t n = options.trials;

    struct Trial {
        double ib, it, ips;
        double pb_avg, pt_avg, pb_any, pt_any;
        RealVector mse_b, mse_t, sinr_b, sinr_t;
    };
    std::vector<Trial> trials(static_cast<std::size_t>(n));

    parallel_trials(n, [&](std::int64_t i) {
        Rng rng = Rng::for_trial(options.seed, static_cast<std::uint64_t>(i));
        const ChannelRealization real = sample(model, rng);
        std::optional<SvdResult> svd_cache;

        const detail::SchemeEval b = eval(benchmark, real, svd_cache, options.constellation);
        const detail::SchemeEval t = eval(test, real, svd_cache, options.constellation);
        const double ips =
            benchmark == SchemeKind::perf_semi
                ? b.info_bits
                : (test == SchemeKind::perf_semi
                       ? t.info_bits
                       : eval(SchemeKind::perf_semi, real, svd_cache, options.constellation)
                             .info_bits);

        Trial& rec = trials[static_cast<std::size_t>(i)];
        rec = {b.info_bits, t.info_bits, ips,    b.p_avg, t.p_avg, b.p_any,
               t.p_any,     b.mse,       t.mse,  b.sinr,  t.sinr};
    });

    std::vector<double> ib(trials.size()), it(trials.size());
    std::vector<double> d_bt(trials.size()), d_bps(trials.size()), d_pst(trials.size());
    std::vector<double> pb(trials.size()), pt(trials.size());
    std::vector<double> pb_any(trials.size()), pt_any(trials.size());
    std::vector<double> dp(trials.size()), dp_any(trials.size()), dmse(trials.size());
    for (std::size_t i = 0; i < trials.size(); ++i) {
        const Trial& r = trials[i];
        ib[i] = r.ib;
        it[i] = r.it;
        d_bt[i] = r.ib - r.it;
        d_bps[i] = r.ib - r.ips;
        d_pst[i] = r.ips - r.it;
        pb[i] = r.pb_avg;
        pt[i] = r.pt_avg;
        pb_any[i] = r.pb_any;
        pt_any[i] = r.pt_any;
        dp[i] = r.pt_avg - r.pb_avg;
        dp_any[i] = r.pt_any - r.pb_any;
        // per-stream MSE ratios have strictly positive denominators, no guard
        double acc = 0.0;
        for (Eigen::Index k = 0; k < r.mse_b.size(); ++k)
            acc += (r.mse_t(k) - r.mse_b(k)) / r.mse_b(k);
        dmse[i] = acc / static_cast<double>(r.mse_b.size());
    }

    DeltaReport rep;
    rep.delta_i = detail::ratio_of_means(d_bt, it);
    rep.delta_i1 = detail::ratio_of_means(d_bps, it);
    rep.delta_i2 = detail::ratio_of_means(d_pst, it);
    rep.delta_i_tilde2 =
        detail::guarded_ratio_mean(d_pst, it, options.denom_guard, rep.discarded_tilde2);
    rep.delta_p = detail::guarded_ratio_mean(dp, pb, options.denom_guard, rep.discarded_p);
    rep.delta_p_any =
        detail::guarded_ratio_mean(dp_any, pb_any, options.denom_guard, rep.discarded_p_any);
    rep.delta_mse = mc_from_samples(dmse);

    rep.benchmark_info_bits = mc_from_samples(ib);
    rep.test_info_bits = mc_from_samples(it);
    rep.benchmark_p_avg = mc_from_samples(pb);
    rep.test_p_avg = mc_from_samples(pt);

    const Eigen::Index streams = trials.front().sinr_b.size();
    rep.delta_sinr.resize(static_cast<std::size_t>(streams));
    std::vector<double> ds(trials.size());
    for (Eigen::Index k = 0; k < streams; ++k) {
        for (std::size_t i = 0; i < trials.size(); ++i)
            ds[i] = trials[i].sinr_b(k) - trials[i].sinr_t(k);
        rep.delta_sinr[static_cast<std::size_t>(k)] = mc_from_samples(ds);
    }
    return rep;
}

/// Checks the closed-form SINR-difference identity: direct per-stream SINRs
/// (matrix-inverse route) against the waterfill/eigenvalue term minus the
/// determinant-adjoint ratio of the statistical Gram matrix.
inline bool delta_sinr_identity_check(const SeparableModel& model, const ChannelRealization& real,
                                      Eigen::Index m, double rho, Eigen::Index k,
                                      double rel_tol = 1e-8) {
    validate_model(model);
    require(k >= 0 && k < m, "delta_sinr_identity_check: stream index out of range");
    require(model.lambda_t.minCoeff() > 0.0 && model.lambda_r.minCoeff() > 0.0,
            "delta_sinr_identity_check: needs a full-rank separable model");

    const double rho_c = model.lambda_t.sum();
    const Eigen::Index nr = real.h_ind.rows(), nt = real.h_ind.cols();

    // Unscaled i.i.d. factor of the separable draw.
    ComplexMatrix h_iid(nr, nt);
    for (Eigen::Index j = 0; j < nt; ++j)
        for (Eigen::Index i = 0; i < nr; ++i) {
            const double sigma = std::sqrt(model.lambda_r(i) * model.lambda_t(j) / rho_c);
            h_iid(i, j) = real.h_ind(i, j) / sigma;
        }

    // Direct route through the closed-form filter-matrix inverses.
    const double lhs = sinr(real.h, perfect_unconstrained(real.h, m, rho))(k) -
                       sinr(real.h, stat_semiunitary(ChannelModel{model}, m, rho))(k);

    // Determinant route on the factored statistics.
    const ComplexMatrix lr = model.lambda_r.asDiagonal();
    const RealVector lt_m = model.lambda_t.head(m);
    const ComplexMatrix h_m = h_iid.leftCols(m);
    const ComplexMatrix core = lt_m.cwiseSqrt().asDiagonal() * h_m.adjoint() * lr * h_m *
                               lt_m.cwiseSqrt().asDiagonal();
    const ComplexMatrix g =
        ComplexMatrix::Identity(m, m) + (rho / (static_cast<double>(m) * rho_c)) * core;

    Complex det_g;
    if (m >= 2 && m % 2 == 0) {
        const Eigen::Index half = m / 2;
        det_g = block_det(g.topLeftCorner(half, half), g.topRightCorner(half, half),
                          g.bottomLeftCorner(half, half), g.bottomRightCorner(half, half));
    } else {
        det_g = g.determinant();
    }
    Complex adj_kk{1.0, 0.0};
    if (m > 1) {
        ComplexMatrix minor(m - 1, m - 1);
        for (Eigen::Index i = 0, mi = 0; i < m; ++i) {
            if (i == k) continue;
            for (Eigen::Index j = 0, mj = 0; j < m; ++j) {
                if (j == k) continue;
                minor(mi, mj) = g(i, j);
                ++mj;
            }
            ++mi;
        }
        adj_kk = minor.determinant();
    }
    const double sinr_stat_rhs = (det_g / adj_kk).real() - 1.0;

    const ComplexMatrix big = model.lambda_t.cwiseSqrt().asDiagonal() * h_iid.adjoint() * lr *
                              h_iid * model.lambda_t.cwiseSqrt().asDiagonal();
    const HermitianEigen eig = hermitian_eig(big);
    RealVector gram_eigs(m);
    for (Eigen::Index i = 0; i < m; ++i) gram_eigs(i) = eig.eigenvalues(i) / rho_c;
    const WaterfillResult wf = waterfill(gram_eigs, rho);
    const double sinr_perf_rhs = wf.lambda_wf(k) * gram_eigs(k);

    const double rhs = sinr_perf_rhs - sinr_stat_rhs;
    return std::abs(lhs - rhs) <= rel_tol * std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

struct BeamformingDelta {
    MCEstimate delta_i_bf;
    MCEstimate delta_p_bf;
    std::int64_t discarded_p = 0;
};

/// M = 1 specialization: perfect beamforming rides the dominant right singular
/// vector (received SNR rho * lambda_max), statistical beamforming the dominant
/// transmit-covariance eigenvector through its quadratic form.
inline BeamformingDelta estimate_delta_beamforming(const ChannelModel& model, double rho,
                                                   const Constellation& c, std::int64_t trials,
                                                   std::uint64_t seed) {
    require(trials >= 1, "estimate_delta_beamforming: trials must be >= 1");
    validate_model(model);
    const ComplexVector u_stat = tx_basis(model).col(0);

    std::vector<double> i_perf(static_cast<std::size_t>(trials)),
        i_stat(static_cast<std::size_t>(trials)), p_perf(static_cast<std::size_t>(trials)),
        p_stat(static_cast<std::size_t>(trials));

    parallel_trials(trials, [&](std::int64_t i) {
        Rng rng = Rng::for_trial(seed, static_cast<std::uint64_t>(i));
        const ChannelRealization real = sample(model, rng);
        const ComplexMatrix gram = real.h.adjoint() * real.h;
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(gram);
        const double lmax = std::max(0.0, es.eigenvalues().maxCoeff());
        const double quad = std::max(0.0, (u_stat.adjoint() * gram * u_stat)(0, 0).real());

        const std::size_t idx = static_cast<std::size_t>(i);
        i_perf[idx] = std::log2(1.0 + rho * lmax);
        i_stat[idx] = std::log2(1.0 + rho * quad);
        p_perf[idx] = std::clamp(c.alpha * q_function(c.beta * std::sqrt(rho * lmax)), 0.0, 1.0);
        p_stat[idx] = std::clamp(c.alpha * q_function(c.beta * std::sqrt(rho * quad)), 0.0, 1.0);
    });

    std::vector<double> diff(i_perf.size()), pdiff(i_perf.size());
    for (std::size_t i = 0; i < i_perf.size(); ++i) {
        diff[i] = i_perf[i] - i_stat[i];
        pdiff[i] = p_stat[i] - p_perf[i];
    }

    BeamformingDelta out;
    out.delta_i_bf = detail::ratio_of_means(diff, i_stat);
    out.delta_p_bf = detail::guarded_ratio_mean(pdiff, p_perf, 1e-9, out.discarded_p);
    return out;
}

/// Conditioning and matching statistics of a model.
struct GapStats {
    double gap_t = 0.0;      // 1 - lambda_t(2) / lambda_t(1)
    double mu_r2 = 0.0;      // sum lambda_r^2 / N_r
    double gap_t_c = 0.0;    // canonical-profile transmit gap statistic
    double mu_r2_c = 0.0;    // canonical-profile receive second moment
    double g_m_lambda_t = 0.0;  // geometric mean of the m dominant transmit eigenvalues
    double g_m_lambda_r = 0.0;
    double b1 = 0.0;  // head-mass fractions
    double b2 = 0.0;
};

inline GapStats gap_statistics(const ChannelModel& model, Eigen::Index m) {
    validate_model(model);
    const RealVector lt = transmit_eigenvalues(model);
    const RealVector lr = receive_eigenvalues(model);
    require(m >= 1 && m <= lt.size() && m <= lr.size(), "gap_statistics: m out of range");
    const double rho_c = lt.sum();
    const Eigen::Index nr = rx_dim(model), nt = tx_dim(model);

    GapStats g;
    g.gap_t = lt.size() > 1 ? 1.0 - lt(1) / lt(0) : 1.0;
    g.mu_r2 = lr.squaredNorm() / static_cast<double>(nr);

    const RealMatrix profile = variance_profile_of(model);
    const RealVector gamma_t = profile.colwise().sum();
    double acc = 0.0;
    for (Eigen::Index k = 1; k < nt; ++k) {
        const double gap = gamma_t(0) - gamma_t(k);
        acc += static_cast<double>(nr) * static_cast<double>(nr) / (gap * gap);
    }
    g.gap_t_c = nt > 1 ? acc / static_cast<double>(nt - 1) : 0.0;
    double best = 0.0;
    for (Eigen::Index j = 1; j < nt; ++j) {
        const double v =
            (profile.col(j).array() * profile.col(0).array()).sum() / static_cast<double>(nr);
        best = std::max(best, v);
    }
    g.mu_r2_c = best;

    double log_t = 0.0, log_r = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
        log_t += std::log(lt(k));
        log_r += std::log(lr(k));
    }
    g.g_m_lambda_t = std::exp(log_t / static_cast<double>(m));
    g.g_m_lambda_r = std::exp(log_r / static_cast<double>(m));
    g.b1 = lt.head(m).sum() / rho_c;
    g.b2 = lr.head(m).sum() / rho_c;
    return g;
}

enum class BoundId {
    waterfill_loss,
    info_loss_separable,
    info_loss_canonical,
    info_loss_beamforming,
    info_loss_proportional,
    error_enhancement,
    error_separable,
    error_separable_dominant,
    error_canonical,
    error_bf_separable,
    error_bf_canonical,
    mse_enhancement,
    mse_enhancement_dominant,
};

inline BoundId bound_from_string(const std::string& s) {
    if (s == "waterfill_loss") return BoundId::waterfill_loss;
    if (s == "info_loss_separable") return BoundId::info_loss_separable;
    if (s == "info_loss_canonical") return BoundId::info_loss_canonical;
    if (s == "info_loss_beamforming") return BoundId::info_loss_beamforming;
    if (s == "info_loss_proportional") return BoundId::info_loss_proportional;
    if (s == "error_enhancement") return BoundId::error_enhancement;
    if (s == "error_separable") return BoundId::error_separable;
    if (s == "error_separable_dominant") return BoundId::error_separable_dominant;
    if (s == "error_canonical") return BoundId::error_canonical;
    if (s == "error_bf_separable") return BoundId::error_bf_separable;
    if (s == "error_bf_canonical") return BoundId::error_bf_canonical;
    if (s == "mse_enhancement") return BoundId::mse_enhancement;
    if (s == "mse_enhancement_dominant") return BoundId::mse_enhancement_dominant;
    throw std::invalid_argument("unknown bound id: " + s);
}

/// Caller-supplied constants for bounds whose constants the analysis leaves
/// unspecified; defaults keep them at 1 so only scaling trends are meaningful.
struct BoundParams {
    double alpha = 4.0;
    double beta = std::numbers::sqrt2;
    double kappa = 1.0;
    std::int64_t trials = 2000;
    std::uint64_t seed = 1;
};

namespace detail {

struct GramMoments {
    double mean_inv = 0.0;       // E[1 / Lambda_H(M)]
    double mean_inv_sq = 0.0;    // E[(1 / Lambda_H(M))^2]
    double mean_info_nats = 0.0; // E[I_stat_semi] in nats
    RealVector mean_wf;          // E[Lambda_wf(k)] under perfect waterfilling
};

inline GramMoments gram_moments(const ChannelModel& model, Eigen::Index m, double rho,
                                std::int64_t trials, std::uint64_t seed) {
    const Precoder stat = stat_semiunitary(model, m, rho);
    const ComplexMatrix f_stat = stat.effective();

    std::vector<double> inv(static_cast<std::size_t>(trials)),
        inv_sq(static_cast<std::size_t>(trials)), info(static_cast<std::size_t>(trials));
    std::vector<RealVector> wf(static_cast<std::size_t>(trials));

    parallel_trials(trials, [&](std::int64_t i) {
        Rng rng = Rng::for_trial(seed, static_cast<std::uint64_t>(i));
        const ChannelRealization real = sample(model, rng);
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(real.h.adjoint() * real.h);
        RealVector eigs = es.eigenvalues().reverse();
        RealVector top = eigs.head(m).cwiseMax(1e-300);
        const std::size_t idx = static_cast<std::size_t>(i);
        inv[idx] = 1.0 / top(m - 1);
        inv_sq[idx] = inv[idx] * inv[idx];
        info[idx] = mutual_info_of_effective(real.h, f_stat) * std::numbers::ln2;
        wf[idx] = waterfill(top, rho).lambda_wf;
    });

    GramMoments g;
    g.mean_wf = RealVector::Zero(m);
    for (std::size_t i = 0; i < inv.size(); ++i) {
        g.mean_inv += inv[i];
        g.mean_inv_sq += inv_sq[i];
        g.mean_info_nats += info[i];
        g.mean_wf += wf[i];
    }
    const double n = static_cast<double>(trials);
    g.mean_inv /= n;
    g.mean_inv_sq /= n;
    g.mean_info_nats /= n;
    g.mean_wf /= n;
    return g;
}

inline void check_snr_condition(double rho, double threshold, const char* who) {
    if (rho < threshold)
        throw std::domain_error(std::string(who) + ": SNR condition unmet (rho = " +
                                std::to_string(rho) + " < " + std::to_string(threshold) + ")");
}

}  // namespace detail

/// Numeric right-hand side of the cited inequality; Monte Carlo inner
/// expectations use (params.trials, params.seed).
inline double evaluate_bound(BoundId id, const ChannelModel& model, Eigen::Index m, double rho,
                             const BoundParams& params) {
    validate_model(model);
    const RealVector lt = transmit_eigenvalues(model);
    const RealVector lr = receive_eigenvalues(model);
    const double rho_c = lt.sum();
    const Eigen::Index nt = tx_dim(model), nr = rx_dim(model);
    const double gamma_r = rho_c / static_cast<double>(nr);
    const double md = static_cast<double>(m);
    const double alpha = params.alpha, beta = params.beta, kappa = params.kappa;

    switch (id) {
        case BoundId::waterfill_loss: {
            const detail::GramMoments g =
                detail::gram_moments(model, m, rho, params.trials, params.seed);
            detail::check_snr_condition(rho, alpha * md * g.mean_inv, "waterfill_loss");
            const double moment_ratio = g.mean_inv_sq / (g.mean_inv * g.mean_inv);
            return 2.0 * md / (alpha * alpha * g.mean_info_nats) * moment_ratio;
        }
        case BoundId::info_loss_separable: {
            double log_sum = 0.0;
            for (Eigen::Index k = 0; k < m; ++k)
                log_sum += 1.0 / std::log(1.0 + rho / md * lt(k));
            return 2.0 * kappa / gamma_r * std::sqrt(lr.squaredNorm()) /
                   static_cast<double>(nr) * log_sum / md;
        }
        case BoundId::info_loss_canonical: {
            const RealMatrix profile = variance_profile_of(model);
            const RealVector gamma_t = profile.colwise().sum();
            double acc = 0.0;
            for (Eigen::Index k = 0; k < m; ++k)
                acc += 1.0 / (gamma_t(k) * std::log(1.0 + rho / md * gamma_t(k)));
            return 2.0 * kappa * std::sqrt(static_cast<double>(nt) / static_cast<double>(nr)) *
                   static_cast<double>(nr) / md * acc;
        }
        case BoundId::info_loss_beamforming: {
            std::vector<double> info(static_cast<std::size_t>(params.trials));
            const ComplexVector u_stat = tx_basis(model).col(0);
            parallel_trials(params.trials, [&](std::int64_t i) {
                Rng rng = Rng::for_trial(params.seed, static_cast<std::uint64_t>(i));
                const ChannelRealization real = sample(model, rng);
                const double quad =
                    std::max(0.0, (u_stat.adjoint() * (real.h.adjoint() * real.h) * u_stat)(0, 0)
                                      .real());
                info[static_cast<std::size_t>(i)] = std::log(1.0 + rho * quad);
            });
            double mean_info = 0.0;
            for (double v : info) mean_info += v;
            mean_info /= static_cast<double>(params.trials);
            const double inner = rho * kappa *
                                 std::sqrt(static_cast<double>(nt) *
                                           std::log(static_cast<double>(nr)) /
                                           static_cast<double>(nr));
            return std::log(1.0 + inner) / mean_info;
        }
        case BoundId::info_loss_proportional: {
            detail::check_snr_condition(rho, alpha * md / lt(m - 1), "info_loss_proportional");
            std::vector<double> term_r(static_cast<std::size_t>(params.trials)),
                term_t(static_cast<std::size_t>(params.trials));
            double log_gr = 0.0, log_gt = 0.0;
            for (Eigen::Index k = 0; k < m; ++k) {
                log_gt += std::log(lt(k));
                log_gr += std::log(lr(k));
            }
            const double g_t = std::exp(log_gt / md), g_r = std::exp(log_gr / md);
            parallel_trials(params.trials, [&](std::int64_t i) {
                Rng rng = Rng::for_trial(params.seed, static_cast<std::uint64_t>(i));
                const ComplexMatrix h_iid = random_iid_cgaussian(rng, nr, nt);
                Eigen::SelfAdjointEigenSolver<ComplexMatrix> er(
                    ComplexMatrix(h_iid.adjoint() * lr.asDiagonal() * h_iid));
                Eigen::SelfAdjointEigenSolver<ComplexMatrix> et(
                    ComplexMatrix(h_iid * lt.asDiagonal() * h_iid.adjoint()));
                term_r[static_cast<std::size_t>(i)] =
                    std::log(er.eigenvalues().maxCoeff() / g_r);
                term_t[static_cast<std::size_t>(i)] =
                    std::log(et.eigenvalues().maxCoeff() / g_t);
            });
            double mean_r = 0.0, mean_t = 0.0;
            for (std::size_t i = 0; i < term_r.size(); ++i) {
                mean_r += term_r[i];
                mean_t += term_t[i];
            }
            mean_r /= static_cast<double>(params.trials);
            mean_t /= static_cast<double>(params.trials);
            const double kappa4 = kappa + std::min(mean_r, mean_t);
            double denom = std::log(rho / std::numbers::e);
            for (Eigen::Index k = 0; k < m; ++k) denom += std::log(lt(k) * lr(k) / rho_c) / md;
            return (std::log(std::numbers::e / md) + kappa4) / denom;
        }
        case BoundId::error_enhancement: {
            std::vector<double> vals(static_cast<std::size_t>(params.trials));
            std::vector<char> valid(static_cast<std::size_t>(params.trials), 0);
            parallel_trials(params.trials, [&](std::int64_t i) {
                Rng rng = Rng::for_trial(params.seed, static_cast<std::uint64_t>(i));
                const ChannelRealization real = sample(model, rng);
                const RealVector s_perf = sinr(real.h, perfect_unconstrained(real.h, m, rho));
                const RealVector s_stat =
                    sinr(real.h, stat_semiunitary(model, m, rho));
                double acc = 0.0;
                for (Eigen::Index k = 0; k < m; ++k) {
                    const double dsinr = s_perf(k) - s_stat(k);
                    const double denom = 1.0 - 1.0 / (beta * beta * s_perf(k));
                    const double root = 1.0 + dsinr / s_stat(k);
                    if (!(denom > 0.0) || !(root >= 0.0) || !(s_stat(k) > 0.0)) return;
                    acc += std::exp(beta * beta * dsinr / 2.0) * std::sqrt(root) / denom;
                }
                vals[static_cast<std::size_t>(i)] = acc / md - 1.0;
                valid[static_cast<std::size_t>(i)] = 1;
            });
            double total = 0.0;
            std::int64_t kept = 0;
            for (std::size_t i = 0; i < vals.size(); ++i)
                if (valid[i]) {
                    total += vals[i];
                    ++kept;
                }
            if (kept == 0)
                throw std::domain_error("error_enhancement: no draw satisfied the Q-bound validity region");
            return total / static_cast<double>(kept);
        }
        case BoundId::error_separable: {
            detail::check_snr_condition(rho, alpha * md / lt(m - 1), "error_separable");
            const detail::GramMoments g =
                detail::gram_moments(model, m, rho, params.trials, params.seed);
            const double moment_ratio = g.mean_inv_sq / (g.mean_inv * g.mean_inv);
            double first = 0.0, head = 0.0;
            for (Eigen::Index k = 0; k < m; ++k) {
                first += 1.0 / (rho * lt(k) / md - 1.0);
                head += lt(k);
            }
            first /= beta * beta * md;
            const double second = beta * beta * (1.0 + md / alpha);
            const double tail = 1.0 / alpha + moment_ratio / (alpha * alpha) +
                                kappa / gamma_r *
                                    (std::sqrt(static_cast<double>(nt)) + std::sqrt(md)) /
                                    std::sqrt(static_cast<double>(nr));
            return first + second + beta * beta * rho * head / md * tail;
        }
        case BoundId::error_separable_dominant: {
            detail::check_snr_condition(rho, alpha * md / lt(m - 1), "error_separable_dominant");
            double inv_sum = 0.0, head = 0.0;
            for (Eigen::Index k = 0; k < m; ++k) {
                inv_sum += 1.0 / lt(k);
                head += lt(k);
            }
            return inv_sum / (beta * beta * rho) + beta * beta * head / lt(m - 1);
        }
        case BoundId::error_canonical: {
            const RealMatrix profile = variance_profile_of(model);
            const RealVector gamma_t = profile.colwise().sum();
            detail::check_snr_condition(rho, alpha * md / gamma_t(m - 1), "error_canonical");
            double head = 0.0, inv_sum = 0.0;
            for (Eigen::Index k = 0; k < m; ++k) {
                head += gamma_t(k);
                inv_sum += 1.0 / gamma_t(k);
            }
            return beta * beta / 2.0 * head / gamma_t(m - 1) +
                   gamma_t(m - 1) * inv_sum / (beta * beta * alpha * md);
        }
        case BoundId::error_bf_separable: {
            const GapStats g = gap_statistics(model, m);
            if (!(g.gap_t > 0.0))
                throw std::domain_error("error_bf_separable: transmit eigenvalue gap condition unmet");
            return kappa * std::sqrt(g.mu_r2) / (g.gap_t * gamma_r) *
                   std::sqrt(static_cast<double>(nt) * std::log(static_cast<double>(nr)) /
                             static_cast<double>(nr));
        }
        case BoundId::error_bf_canonical: {
            const GapStats g = gap_statistics(model, m);
            return kappa * std::sqrt(g.gap_t_c * g.mu_r2_c) *
                   std::sqrt(static_cast<double>(nt) * std::log(static_cast<double>(nr)) /
                             static_cast<double>(nr));
        }
        case BoundId::mse_enhancement: {
            detail::check_snr_condition(rho, alpha * md / lt(m - 1), "mse_enhancement");
            const detail::GramMoments g =
                detail::gram_moments(model, m, rho, params.trials, params.seed);
            double last = 0.0;
            for (Eigen::Index k = 0; k < m; ++k)
                last += lt(k) * (g.mean_wf(k) - rho / md) / (1.0 + rho * lt(k) / md);
            last /= md;
            const double rhs = md / alpha +
                               md / gamma_r * kappa *
                                   (std::sqrt(md) + std::sqrt(static_cast<double>(nt))) /
                                   std::sqrt(static_cast<double>(nr)) +
                               last;
            return (1.0 + md / alpha) * rhs;
        }
        case BoundId::mse_enhancement_dominant: {
            return md / gamma_r * kappa *
                   (std::sqrt(md) + std::sqrt(static_cast<double>(nt))) /
                   std::sqrt(static_cast<double>(nr));
        }
    }
    throw std::invalid_argument("evaluate_bound: unknown bound id");
}

/// Empirical check of the eigenvalue-support concentration for X X^H / n
/// (i.i.d., weighted, or variance-profiled X).
struct RmtSupportReport {
    std::int64_t trials = 0;
    std::int64_t checked = 0;
    std::int64_t violations = 0;
    double violation_fraction = 0.0;
    double support_lower = 0.0;
    double support_upper = 0.0;
    double margin_factor = 0.0;  // 3 n^{-1/3} multiplicative slack
    double min_extreme = 0.0;
    double max_extreme = 0.0;
    double fitted_gamma = 0.0;  // max standardized edge deviation
};

inline RmtSupportReport rmt_support_check(Eigen::Index p, Eigen::Index n,
                                          const std::optional<RealVector>& weights,
                                          const std::optional<RealMatrix>& variance_profile,
                                          std::int64_t trials, std::uint64_t seed,
                                          double gamma = 2.0) {
    require(p >= 1 && n >= p, "rmt_support_check: need 1 <= p <= n");
    require(trials >= 1, "rmt_support_check: trials must be >= 1");
    require(!(weights && variance_profile),
            "rmt_support_check: weights and variance_profile are mutually exclusive");
    if (weights) require(weights->size() == n, "rmt_support_check: weights length must be n");
    if (variance_profile)
        require(variance_profile->rows() == p && variance_profile->cols() == n,
                "rmt_support_check: variance_profile must be p x n");

    RmtSupportReport rep;
    rep.trials = trials;
    rep.margin_factor = 3.0 * std::pow(static_cast<double>(n), -1.0 / 3.0);

    const double ratio_half = std::sqrt(static_cast<double>(p) / static_cast<double>(n));
    double center = 1.0, halfwidth = 2.0 * ratio_half;
    RealVector centers;
    if (weights) {
        center = weights->sum() / static_cast<double>(n);
        halfwidth = gamma * ratio_half;
    } else if (variance_profile) {
        centers = sorted_descending(variance_profile->rowwise().sum() / static_cast<double>(n));
        halfwidth = gamma * ratio_half;
    }
    rep.support_lower = center - halfwidth;
    rep.support_upper = center + halfwidth;

    std::vector<double> mins(static_cast<std::size_t>(trials)),
        maxs(static_cast<std::size_t>(trials));
    std::vector<std::int64_t> viol(static_cast<std::size_t>(trials), 0);
    std::vector<double> fit(static_cast<std::size_t>(trials), 0.0);

    parallel_trials(trials, [&](std::int64_t t) {
        Rng rng = Rng::for_trial(seed, static_cast<std::uint64_t>(t));
        ComplexMatrix x(p, n);
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < p; ++i) {
                double var = 1.0;
                if (variance_profile) var = (*variance_profile)(i, j);
                x(i, j) = var > 0.0 ? rng.next_cgaussian(var) : Complex{0.0, 0.0};
            }
        ComplexMatrix s;
        if (weights)
            s = x * weights->asDiagonal() * x.adjoint() / static_cast<double>(n);
        else
            s = x * x.adjoint() / static_cast<double>(n);
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(s);
        const RealVector eigs = es.eigenvalues().reverse();

        const std::size_t idx = static_cast<std::size_t>(t);
        mins[idx] = eigs(p - 1);
        maxs[idx] = eigs(0);

        if (variance_profile) {
            std::int64_t v = 0;
            double worst = 0.0;
            for (Eigen::Index i = 0; i < p; ++i) {
                const double lo = centers(i) - halfwidth;
                const double hi = centers(i) + halfwidth;
                const double lo_eff = lo - rep.margin_factor * std::abs(lo);
                const double hi_eff = hi + rep.margin_factor * std::abs(hi);
                if (eigs(i) < lo_eff || eigs(i) > hi_eff) ++v;
                worst = std::max(worst, std::abs(eigs(i) - centers(i)) / ratio_half);
            }
            viol[idx] = v;
            fit[idx] = worst;
        } else {
            const double lo_eff = rep.support_lower - rep.margin_factor * std::abs(rep.support_lower);
            const double hi_eff = rep.support_upper + rep.margin_factor * std::abs(rep.support_upper);
            std::int64_t v = 0;
            if (mins[idx] < lo_eff) ++v;
            if (maxs[idx] > hi_eff) ++v;
            viol[idx] = v;
            fit[idx] = std::max(std::abs(maxs[idx] - center), std::abs(mins[idx] - center)) /
                       ratio_half;
        }
    });

    rep.min_extreme = mins[0];
    rep.max_extreme = maxs[0];
    for (std::size_t i = 0; i < mins.size(); ++i) {
        rep.min_extreme = std::min(rep.min_extreme, mins[i]);
        rep.max_extreme = std::max(rep.max_extreme, maxs[i]);
        rep.violations += viol[i];
        rep.fitted_gamma = std::max(rep.fitted_gamma, fit[i]);
    }
    rep.checked = variance_profile ? trials * p : trials * 2;
    rep.violation_fraction =
        static_cast<double>(rep.violations) / static_cast<double>(rep.checked);
    return rep;
}

}  // namespace corrmimo
