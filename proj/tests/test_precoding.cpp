#include <catch_amalgamated.hpp>

#include "corrmimo/link.hpp"
#include "corrmimo/precoding.hpp"
#include "corrmimo/selfcheck.hpp"

using namespace corrmimo;

namespace {

ComplexMatrix diag_channel(std::initializer_list<double> xs) {
    ComplexMatrix h = ComplexMatrix::Zero(static_cast<Eigen::Index>(xs.size()),
                                          static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) {
        h(i, i) = x;
        ++i;
    }
    return h;
}

SeparableModel fig4a_model() {
    SeparableModel m;
    m.lambda_t = RealVector(4);
    m.lambda_t << 9.80, 5.66, 0.45, 0.09;
    m.lambda_r = RealVector(4);
    m.lambda_r << 8.58, 4.20, 1.98, 1.24;
    m.u_t = ComplexMatrix::Identity(4, 4);
    m.u_r = ComplexMatrix::Identity(4, 4);
    return m;
}

}  // namespace

TEST_CASE("waterfill hand cases") {
    RealVector lam(2);
    lam << 4.0, 1.0;

    const WaterfillResult full = waterfill(lam, 1.0);
    REQUIRE(full.n_h == 2);
    REQUIRE(full.mu_h == Catch::Approx(1.125).margin(1e-12));
    REQUIRE(full.lambda_wf(0) == Catch::Approx(0.875).margin(1e-12));
    REQUIRE(full.lambda_wf(1) == Catch::Approx(0.125).margin(1e-12));

    const WaterfillResult partial = waterfill(lam, 0.5);
    REQUIRE(partial.n_h == 1);
    REQUIRE(partial.lambda_wf(0) == Catch::Approx(0.5).margin(1e-12));
    REQUIRE(partial.lambda_wf(1) == 0.0);
}

TEST_CASE("waterfill matches exhaustive active-set enumeration on 1000 instances") {
    Rng rng(21);
    for (int t = 0; t < 1000; ++t) {
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.next_u64() % 8);
        RealVector lam(n);
        for (Eigen::Index k = 0; k < n; ++k) lam(k) = 0.02 + 6.0 * rng.next_double();
        lam = sorted_descending(lam);
        const double rho = 0.05 + 12.0 * rng.next_double();

        const WaterfillResult wf = waterfill(lam, rho);
        const RealVector ref = selfcheck::waterfill_enumeration(lam, rho);
        REQUIRE((wf.lambda_wf - ref).cwiseAbs().maxCoeff() < 1e-10);
        REQUIRE(wf.lambda_wf.sum() == Catch::Approx(rho).margin(1e-10));
        REQUIRE(wf.lambda_wf.minCoeff() >= 0.0);
        for (Eigen::Index k = 0; k < n; ++k) {
            if (k < wf.n_h)
                REQUIRE(wf.lambda_wf(k) > 0.0);
            else
                REQUIRE(wf.lambda_wf(k) == 0.0);
        }
    }
}

TEST_CASE("waterfill converges to uniform power at high SNR") {
    RealVector lam(4);
    lam << 5.0, 3.0, 2.0, 1.0;
    const double rho = 1e6;
    const WaterfillResult wf = waterfill(lam, rho);
    REQUIRE(wf.n_h == 4);
    for (int k = 0; k < 4; ++k)
        REQUIRE(wf.lambda_wf(k) == Catch::Approx(rho / 4.0).epsilon(1e-3));
}

TEST_CASE("waterfill rejects invalid input") {
    REQUIRE_THROWS_AS(waterfill(RealVector(), 1.0), std::invalid_argument);
    RealVector lam(1);
    lam << 2.0;
    REQUIRE_THROWS_AS(waterfill(lam, 0.0), std::invalid_argument);
    RealVector zero(2);
    zero << 1.0, 0.0;
    REQUIRE_THROWS_AS(waterfill(zero, 1.0), std::invalid_argument);
}

TEST_CASE("perfect unconstrained precoder reproduces the diag(2,1) hand case") {
    const ComplexMatrix h = diag_channel({2.0, 1.0});
    const Precoder p = perfect_unconstrained(h, 2, 1.0);

    // lambda_f = (M/rho) * lambda_wf with lambda_wf = [0.875, 0.125]
    REQUIRE(p.lambda_f(0) == Catch::Approx(2.0 * 0.875).margin(1e-12));
    REQUIRE(p.lambda_f(1) == Catch::Approx(2.0 * 0.125).margin(1e-12));
    REQUIRE(mutual_info(h, p) ==
            Catch::Approx(std::log2(4.5) + std::log2(1.125)).margin(1e-9));
    REQUIRE(mutual_info(h, p) == Catch::Approx(2.3399).margin(5e-5));

    // Power budget trace(F F^H) = rho.
    const ComplexMatrix f = p.effective();
    REQUIRE((f * f.adjoint()).trace().real() == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("equal singular values give uniform unconstrained power") {
    Rng rng(22);
    const ComplexMatrix u = random_unitary(rng, 3);
    const ComplexMatrix v = random_unitary(rng, 3);
    const ComplexMatrix h = 2.0 * u * v.adjoint();
    const Precoder p = perfect_unconstrained(h, 3, 2.0);
    for (int k = 0; k < 3; ++k) REQUIRE(p.lambda_f(k) == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("every constructed precoder satisfies the power budget") {
    Rng rng(23);
    const ChannelModel model{fig4a_model()};
    for (int t = 0; t < 100; ++t) {
        const ChannelRealization real = sample(model, rng);
        const double rho = 0.2 + 9.0 * rng.next_double();
        for (const Precoder& p :
             {perfect_unconstrained(real.h, 2, rho), perfect_semiunitary(real.h, 2, rho),
              perfect_equalized(real.h, 2, rho), stat_semiunitary(model, 2, rho),
              stat_fixed(model, 2, rho, 2.0)}) {
            REQUIRE(is_semiunitary(p.v_f, 1e-10));
            REQUIRE(p.lambda_f.sum() <= 2.0 + 1e-10);
            const ComplexMatrix f = p.effective();
            REQUIRE((f * f.adjoint()).trace().real() <= rho + 1e-9);
        }
    }
}

TEST_CASE("perfect semiunitary beats random semiunitary competitors (mutual information)") {
    Rng rng(24);
    for (int channel = 0; channel < 100; ++channel) {
        const ComplexMatrix h = random_iid_cgaussian(rng, 4, 4);
        const double rho = 4.0;
        const Precoder best = perfect_semiunitary(h, 2, rho);
        const double i_best = mutual_info(h, best);
        for (int comp = 0; comp < 100; ++comp) {
            Precoder rival = best;
            rival.v_f = random_semiunitary(rng, 4, 2);
            REQUIRE(mutual_info(h, rival) <= i_best + 1e-9);
        }
    }
}

TEST_CASE("1x1 channel: semiunitary precoder is the scalar one") {
    ComplexMatrix h(1, 1);
    h(0, 0) = 0.7;
    const Precoder p = perfect_semiunitary(h, 1, 2.0);
    REQUIRE(std::abs(std::abs(p.v_f(0, 0)) - 1.0) < 1e-12);
}

TEST_CASE("m = N_t: any unitary precoder yields the same mutual information") {
    Rng rng(25);
    const ComplexMatrix h = random_iid_cgaussian(rng, 4, 4);
    const double rho = 3.0;
    const Precoder opt = perfect_semiunitary(h, 4, rho);
    const double i_opt = mutual_info(h, opt);
    for (int t = 0; t < 20; ++t) {
        Precoder rival = opt;
        rival.v_f = random_unitary(rng, 4);
        REQUIRE(mutual_info(h, rival) == Catch::Approx(i_opt).margin(1e-9));
    }
}

TEST_CASE("equalized precoder equalizes per-stream MSE at the unrotated mean") {
    const ComplexMatrix h = diag_channel({2.0, 1.0});
    const double rho = 1.0;
    const Precoder plain = perfect_semiunitary(h, 2, rho);
    const Precoder equal = perfect_equalized(h, 2, rho);

    const RealVector mse_plain = mse(h, plain);
    const RealVector mse_equal = mse(h, equal);
    const double mean = mse_plain.mean();
    REQUIRE(mse_equal(0) == Catch::Approx(mean).margin(1e-9));
    REQUIRE(mse_equal(1) == Catch::Approx(mean).margin(1e-9));
    REQUIRE(mse_equal.sum() == Catch::Approx(mse_plain.sum()).margin(1e-10));

    // Equal singular values: already equalized, the rotation must keep it.
    Rng rng(26);
    const ComplexMatrix u = random_unitary(rng, 2);
    const ComplexMatrix heq = 1.5 * u;
    const RealVector m_eq = mse(heq, perfect_equalized(heq, 2, rho));
    REQUIRE(std::abs(m_eq(0) - m_eq(1)) < 1e-9);
}

TEST_CASE("equalized precoder minimizes sum of squared MSEs over rotations") {
    Rng rng(27);
    for (int channel = 0; channel < 100; ++channel) {
        const ComplexMatrix h = random_iid_cgaussian(rng, 4, 4);
        const double rho = 2.0;
        const Precoder equal = perfect_equalized(h, 2, rho);
        const RealVector m_eq = mse(h, equal);
        REQUIRE(m_eq.maxCoeff() - m_eq.minCoeff() < 1e-9);
        const double obj_eq = m_eq.squaredNorm();

        const Precoder base = perfect_semiunitary(h, 2, rho);
        for (int comp = 0; comp < 100; ++comp) {
            Precoder rival = base;
            rival.v_f = base.v_f * random_unitary(rng, 2);
            REQUIRE(obj_eq <= mse(h, rival).squaredNorm() + 1e-9);
        }
    }
}

TEST_CASE("fixed precoder specializes and respects Schur objectives") {
    Rng rng(28);
    const ComplexMatrix h = random_iid_cgaussian(rng, 4, 4);
    const double rho = 3.0;

    const Precoder semi = perfect_fixed(h, 2, rho, RealVector::Ones(2),
                                        PrecoderObjective::schur_concave);
    REQUIRE(rel_error(semi.effective(), perfect_semiunitary(h, 2, rho).effective()) < 1e-12);

    const Precoder equalized = perfect_fixed(h, 2, rho, RealVector::Ones(2),
                                             PrecoderObjective::schur_convex);
    const RealVector m_eq = mse(h, equalized);
    REQUIRE(std::abs(m_eq(0) - m_eq(1)) < 1e-9);
    REQUIRE(rel_error(equalized.effective(), perfect_equalized(h, 2, rho).effective()) < 1e-10);

    RealVector lopsided(2);
    lopsided << 2.0, 0.0;
    const Precoder dead = perfect_fixed(h, 2, rho, lopsided, PrecoderObjective::schur_concave);
    REQUIRE(sinr(h, dead)(1) == Catch::Approx(0.0).margin(1e-12));

    RealVector heavy(2);
    heavy << 2.0, 0.5;
    REQUIRE_THROWS_AS(perfect_fixed(h, 2, rho, heavy, PrecoderObjective::schur_concave),
                      std::invalid_argument);
}

TEST_CASE("fixed precoder with shaped power beats random direction rivals") {
    Rng rng(29);
    RealVector shaping(2);
    shaping << 1.3, 0.7;
    for (int channel = 0; channel < 100; ++channel) {
        const ComplexMatrix h = random_iid_cgaussian(rng, 4, 4);
        const double rho = 4.0;
        const Precoder opt = perfect_fixed(h, 2, rho, shaping, PrecoderObjective::schur_concave);
        const double i_opt = mutual_info(h, opt);
        for (int comp = 0; comp < 100; ++comp) {
            Precoder rival = opt;
            rival.v_f = random_semiunitary(rng, 4, 2);
            REQUIRE(mutual_info(h, rival) <= i_opt + 1e-9);
        }
    }
}

TEST_CASE("rank-deficient channels are rejected") {
    const ComplexMatrix h = diag_channel({2.0, 0.0});
    REQUIRE_THROWS_AS(perfect_unconstrained(h, 2, 1.0), std::domain_error);
    REQUIRE_THROWS_AS(perfect_semiunitary(h, 2, 1.0), std::domain_error);
}

TEST_CASE("statistical semiunitary picks the leading covariance eigenvectors") {
    const ChannelModel model{fig4a_model()};
    const Precoder p = stat_semiunitary(model, 2, 1.0);
    REQUIRE(rel_error(p.v_f, ComplexMatrix(ComplexMatrix::Identity(4, 4).leftCols(2))) < 1e-12);
    REQUIRE(p.lambda_f.sum() == Catch::Approx(2.0));

    // Invariant to the receive spectrum.
    SeparableModel other = fig4a_model();
    other.lambda_r = RealVector::Constant(4, 4.0);
    const Precoder q = stat_semiunitary(ChannelModel{other}, 2, 1.0);
    REQUIRE(rel_error(q.v_f, p.v_f) == 0.0);

    SeparableModel rank1 = fig4a_model();
    rank1.lambda_t = RealVector::Zero(4);
    rank1.lambda_t(0) = 16.0;
    REQUIRE_THROWS_AS(stat_semiunitary(ChannelModel{rank1}, 2, 1.0), std::domain_error);
}

TEST_CASE("fixed statistical precoder switches branches at the threshold SNR") {
    const ChannelModel model{fig4a_model()};
    const double snr_t = snr_threshold(model, 2, 2.0);
    REQUIRE(snr_t == Catch::Approx(2.0 * 2.0 / 5.66).margin(1e-12));

    const Precoder below = stat_fixed(model, 2, 0.5 * snr_t, 2.0);
    REQUIRE(below.lambda_f(0) == Catch::Approx(2.0 * 9.80 / 15.46).margin(1e-4));
    REQUIRE(below.lambda_f(1) == Catch::Approx(2.0 * 5.66 / 15.46).margin(1e-4));
    REQUIRE(below.lambda_f(0) == Catch::Approx(1.2678).margin(1e-4));
    REQUIRE(below.lambda_f(1) == Catch::Approx(0.7322).margin(1e-4));

    const Precoder at = stat_fixed(model, 2, snr_t, 2.0);
    REQUIRE(at.lambda_f(0) == 1.0);
    REQUIRE(at.lambda_f(1) == 1.0);

    // Above threshold the fixed scheme coincides with the semiunitary one.
    const Precoder above = stat_fixed(model, 2, 2.0 * snr_t, 2.0);
    const Precoder semi = stat_semiunitary(model, 2, 2.0 * snr_t);
    REQUIRE(rel_error(above.effective(), semi.effective()) == 0.0);

    REQUIRE_THROWS_AS(stat_fixed(model, 2, 1.0, 1.0), std::invalid_argument);

    SeparableModel matched;
    matched.lambda_t = RealVector(4);
    matched.lambda_t << 8.0, 8.0, 0.0, 0.0;
    matched.lambda_r = RealVector::Constant(4, 4.0);
    matched.u_t = ComplexMatrix::Identity(4, 4);
    matched.u_r = ComplexMatrix::Identity(4, 4);
    REQUIRE(snr_threshold(ChannelModel{matched}, 2, 2.0) == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("statistical power optimizer: iid symmetry and grid-search oracles") {
    SeparableModel iid;
    iid.lambda_t = RealVector::Constant(4, 4.0);
    iid.lambda_r = RealVector::Constant(4, 4.0);
    iid.u_t = ComplexMatrix::Identity(4, 4);
    iid.u_r = ComplexMatrix::Identity(4, 4);

    StatPowerOptions opts;
    opts.batch = 600;
    opts.max_iters = 3000;

    SECTION("iid model gives uniform power within 2%") {
        Rng rng(31);
        const StatPowerResult res = optimize_stat_power(ChannelModel{iid}, 2, 4.0, opts, rng);
        REQUIRE(res.lambda(0) == Catch::Approx(1.0).epsilon(0.02));
        REQUIRE(res.lambda(1) == Catch::Approx(1.0).epsilon(0.02));
    }

    SECTION("skewed spectrum at very low SNR concentrates power on the lead mode") {
        SeparableModel skew = iid;
        skew.lambda_t = RealVector(4);
        skew.lambda_t << 15.0, 0.6, 0.25, 0.15;
        skew.lambda_r = RealVector::Constant(4, 4.0);

        Rng rng(32);
        const double rho = 0.05;
        const StatPowerResult res = optimize_stat_power(ChannelModel{skew}, 2, rho, opts, rng);

        // 1-D grid-search oracle on the same batch: lambda = (x, 2 - x).
        Rng oracle_rng(32);
        const RealMatrix profile = variance_profile_of(ChannelModel{skew});
        std::vector<ComplexMatrix> grams;
        for (Eigen::Index b = 0; b < opts.batch; ++b) {
            ComplexMatrix cols(4, 2);
            for (Eigen::Index j = 0; j < 2; ++j)
                for (Eigen::Index i = 0; i < 4; ++i)
                    cols(i, j) = oracle_rng.next_cgaussian(profile(i, j));
            grams.push_back(cols.adjoint() * cols);
        }
        const auto objective = [&](double x) {
            RealVector lam(2);
            lam << x, 2.0 - x;
            double total = 0.0;
            for (const auto& g : grams) {
                const ComplexMatrix inner =
                    ComplexMatrix::Identity(2, 2) + rho / 2.0 * lam.asDiagonal() * g;
                total += std::log(std::abs(inner.determinant()));
            }
            return total / static_cast<double>(grams.size());
        };
        double best_x = 0.0, best_f = -1.0;
        for (double x = 0.0; x <= 2.0 + 1e-12; x += 0.005) {
            const double f = objective(x);
            if (f > best_f) {
                best_f = f;
                best_x = x;
            }
        }
        REQUIRE(best_x > 1.9);  // oracle confirms the concentrate-on-lead-mode regime
        REQUIRE(res.lambda(0) == Catch::Approx(best_x).margin(0.05));
        REQUIRE(res.objective >= best_f - 1e-6);
    }

    SECTION("high SNR drives the optimum toward uniform within 5%") {
        SeparableModel skew = iid;
        skew.lambda_t = RealVector(4);
        skew.lambda_t << 8.0, 6.0, 1.5, 0.5;
        skew.lambda_r = RealVector::Constant(4, 4.0);
        Rng rng(33);
        const StatPowerResult res = optimize_stat_power(ChannelModel{skew}, 2, 200.0, opts, rng);
        REQUIRE(res.lambda(0) == Catch::Approx(1.0).epsilon(0.05));
        REQUIRE(res.lambda(1) == Catch::Approx(1.0).epsilon(0.05));
    }

    SECTION("batch precondition enforced") {
        Rng rng(34);
        StatPowerOptions tiny;
        tiny.batch = 50;
        REQUIRE_THROWS_AS(optimize_stat_power(ChannelModel{iid}, 2, 1.0, tiny, rng),
                          std::invalid_argument);
    }
}
