#include <catch_amalgamated.hpp>

#include "corrmimo/channel.hpp"
#include "corrmimo/matcore.hpp"

using namespace corrmimo;

namespace {

SeparableModel fig1_matched() {
    SeparableModel m;
    m.lambda_t = RealVector(4);
    m.lambda_t << 8.0, 8.0, 0.0, 0.0;
    m.lambda_r = RealVector::Constant(4, 4.0);
    m.u_t = ComplexMatrix::Identity(4, 4);
    m.u_r = ComplexMatrix::Identity(4, 4);
    return m;
}

CanonicalModel study_profile() {
    CanonicalModel m;
    m.variance_profile = RealMatrix(4, 4);
    m.variance_profile << 1.66, 0.31, 1.71, 0.31,  //
        2.24, 0.18, 0.15, 0.54,                    //
        1.97, 1.46, 0.70, 0.28,                    //
        1.65, 1.65, 0.49, 0.71;
    m.u_t = ComplexMatrix::Identity(4, 4);
    m.u_r = ComplexMatrix::Identity(4, 4);
    return m;
}

}  // namespace

TEST_CASE("zero-variance transmit modes draw identically zero columns") {
    Rng rng(1);
    const ChannelModel model{fig1_matched()};
    for (int t = 0; t < 50; ++t) {
        const ChannelRealization real = sample(model, rng);
        REQUIRE(real.h_ind.col(2).cwiseAbs().maxCoeff() == 0.0);
        REQUIRE(real.h_ind.col(3).cwiseAbs().maxCoeff() == 0.0);
        REQUIRE(rel_error(real.h, real.h_ind) == 0.0);  // identity bases
    }
}

TEST_CASE("iid special case has flat entry variances rho_c/(Nt*Nr)") {
    SeparableModel m;
    m.lambda_t = RealVector::Constant(4, 4.0);
    m.lambda_r = RealVector::Constant(4, 4.0);
    m.u_t = ComplexMatrix::Identity(4, 4);
    m.u_r = ComplexMatrix::Identity(4, 4);
    const RealMatrix profile = variance_profile_of(ChannelModel{m});
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) REQUIRE(profile(i, j) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("empirical channel power matches rho_c") {
    Rng rng(2);
    const ChannelModel model{fig1_matched()};
    const int trials = 100000;
    double acc = 0.0;
    for (int t = 0; t < trials; ++t) acc += sample(model, rng).h.squaredNorm();
    acc /= trials;
    REQUIRE(acc == Catch::Approx(16.0).epsilon(0.01));
}

TEST_CASE("transmit covariance: exact algebra and Monte Carlo oracle") {
    const ChannelModel model{fig1_matched()};
    const ComplexMatrix sigma_t = transmit_covariance(model);
    ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
    const RealVector lt = transmit_eigenvalues(model);
    for (int k = 0; k < 4; ++k) expected(k, k) = lt(k);
    REQUIRE(rel_error(sigma_t, expected) < 1e-12);

    Rng rng(3);
    ComplexMatrix acc = ComplexMatrix::Zero(4, 4);
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) {
        const ChannelRealization real = sample(model, rng);
        acc += real.h.adjoint() * real.h;
    }
    acc /= static_cast<double>(trials);
    REQUIRE(rel_error(acc, sigma_t) < 0.02);
}

TEST_CASE("trace consistency of both covariance matrices") {
    const ChannelModel sep{fig1_matched()};
    REQUIRE(transmit_covariance(sep).trace().real() ==
            Catch::Approx(receive_covariance(sep).trace().real()).epsilon(1e-9));

    const ChannelModel canon{study_profile()};
    REQUIRE(transmit_covariance(canon).trace().real() ==
            Catch::Approx(receive_covariance(canon).trace().real()).epsilon(1e-9));
}

TEST_CASE("study variance profile has the documented transmit spectrum") {
    const ChannelModel model{study_profile()};
    const RealVector lt = transmit_eigenvalues(model);
    REQUIRE(lt(0) == Catch::Approx(7.52).margin(1e-9));
    REQUIRE(lt(1) == Catch::Approx(3.60).margin(1e-9));
    REQUIRE(lt(2) == Catch::Approx(3.05).margin(1e-9));
    REQUIRE(lt(3) == Catch::Approx(1.84).margin(1e-9));
}

TEST_CASE("matching metrics") {
    const ChannelModel matched{fig1_matched()};
    REQUIRE(matching_metric_tx(matched, 2) == Catch::Approx(64.0));
    REQUIRE(matching_metric_rx(matched) == Catch::Approx(64.0));

    SeparableModel flat = fig1_matched();
    flat.lambda_t = RealVector::Constant(4, 4.0);
    REQUIRE(matching_metric_tx(ChannelModel{flat}, 2) == Catch::Approx(16.0));

    SeparableModel spiked = fig1_matched();
    spiked.lambda_r = RealVector::Zero(4);
    spiked.lambda_r(0) = 16.0;
    REQUIRE(matching_metric_rx(ChannelModel{spiked}) == Catch::Approx(256.0));

    REQUIRE(matching_metric_rx(matched) == Catch::Approx(16.0 * 16.0 / 4.0));

    REQUIRE(matching_metric_tx(matched, 3) == 0.0);
    REQUIRE_THROWS_AS(matching_metric_tx(matched, 5), std::invalid_argument);
}

TEST_CASE("matched and mismatched constructors reproduce the study channels") {
    Rng rng(4);
    const SeparableModel matched = make_matched(4, 4, 2, 16.0, rng);
    REQUIRE(matched.lambda_t(0) == Catch::Approx(8.0));
    REQUIRE(matched.lambda_t(1) == Catch::Approx(8.0));
    REQUIRE(matched.lambda_t(2) == 0.0);
    REQUIRE(matched.lambda_r(3) == Catch::Approx(4.0));
    REQUIRE(matching_metric_tx(ChannelModel{matched}, 2) == Catch::Approx(std::pow(16.0 / 2, 2)));

    const SeparableModel flat = make_mismatched(4, 4, 2, 16.0, MismatchProfile{1.0, 1.0}, rng);
    for (int k = 0; k < 4; ++k) REQUIRE(flat.lambda_t(k) == Catch::Approx(4.0));

    const SeparableModel steep = make_mismatched(4, 4, 2, 16.0, MismatchProfile{}, rng);
    REQUIRE(steep.lambda_t(0) / steep.lambda_t(3) == Catch::Approx(1e3).epsilon(1e-9));
    REQUIRE(steep.lambda_t.sum() == Catch::Approx(16.0));
    REQUIRE(steep.lambda_t.minCoeff() > 0.0);

    REQUIRE_THROWS_AS(
        make_mismatched(4, 4, 2, 16.0,
                        MismatchProfile{std::numeric_limits<double>::infinity(), 1.0}, rng),
        std::invalid_argument);
}

TEST_CASE("random unitary bases keep h = u_r h_ind u_t^H") {
    Rng rng(5);
    const SeparableModel model = make_mismatched(4, 6, 2, 12.0, MismatchProfile{10.0, 10.0}, rng,
                                                 UnitaryChoice::seeded_random);
    Rng draw(6);
    for (int t = 0; t < 100; ++t) {
        const ChannelRealization real = sample(ChannelModel{model}, draw);
        REQUIRE(rel_error(real.h, ComplexMatrix(model.u_r * real.h_ind * model.u_t.adjoint())) <
                1e-10);
    }
}

TEST_CASE("per-column empirical variance matches the column sums") {
    Rng rng(7);
    const ChannelModel model{study_profile()};
    const RealVector expected = transmit_eigenvalues(model);
    RealVector acc = RealVector::Zero(4);
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) {
        const ChannelRealization real = sample(model, rng);
        for (int j = 0; j < 4; ++j) acc(j) += real.h_ind.col(j).squaredNorm();
    }
    acc /= static_cast<double>(trials);
    for (int j = 0; j < 4; ++j) REQUIRE(acc(j) == Catch::Approx(expected(j)).epsilon(0.02));
}

TEST_CASE("separable equals rank-one canonical given identical seeds") {
    SeparableModel sep = fig1_matched();
    sep.lambda_t = RealVector(4);
    sep.lambda_t << 7.0, 5.0, 3.0, 1.0;
    CanonicalModel canon;
    canon.variance_profile = variance_profile_of(ChannelModel{sep});
    canon.u_t = sep.u_t;
    canon.u_r = sep.u_r;

    Rng rng_a(99), rng_b(99);
    for (int t = 0; t < 20; ++t) {
        const ChannelRealization a = sample(ChannelModel{sep}, rng_a);
        const ChannelRealization b = sample(ChannelModel{canon}, rng_b);
        REQUIRE((a.h - b.h).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("model validation names the violated invariant") {
    SeparableModel bad = fig1_matched();
    bad.lambda_r(3) = 1.0;  // breaks power consistency
    REQUIRE_THROWS_WITH(validate_model(ChannelModel{bad}),
                        Catch::Matchers::ContainsSubstring("channel power"));

    SeparableModel unsorted = fig1_matched();
    unsorted.lambda_t(0) = 0.0;
    unsorted.lambda_t(3) = 8.0;
    REQUIRE_THROWS_WITH(validate_model(ChannelModel{unsorted}),
                        Catch::Matchers::ContainsSubstring("non-increasing"));

    CanonicalModel canon = study_profile();
    canon.variance_profile(0, 0) = -0.1;
    REQUIRE_THROWS_AS(validate_model(ChannelModel{canon}), std::invalid_argument);
}

TEST_CASE("matching sweep family covers the range, sums to rho_c, ranks at least m") {
    Rng rng(8);
    const auto family = matching_sweep_family(4, 2, 16.0, 200, rng);
    REQUIRE(family.size() >= 190);  // dedup may drop a few

    double prev = 0.0;
    for (const RealVector& lt : family) {
        REQUIRE(lt.sum() == Catch::Approx(16.0).margin(1e-9));
        REQUIRE(is_non_increasing(lt, 1e-12));
        REQUIRE(lt.minCoeff() >= 0.0);
        REQUIRE(lt(1) > 0.0);  // rank >= 2
        const double mt = lt(0) * lt(1);
        REQUIRE(mt > prev);  // strictly increasing after dedup
        prev = mt;
    }
    const double mt_min = family.front()(0) * family.front()(1);
    const double mt_max = family.back()(0) * family.back()(1);
    REQUIRE(mt_max > 63.0);
    REQUIRE(mt_max <= 64.0 + 1e-9);
    REQUIRE(mt_min < 64.0 * 1e-5);  // default span reaches six decades down

    // narrower explicit span still honors the requested coverage
    Rng rng2(9);
    const auto narrow = matching_sweep_family(4, 2, 16.0, 50, rng2, 2.0);
    const double narrow_min = narrow.front()(0) * narrow.front()(1);
    REQUIRE(narrow_min < 64.0 * 1e-1);
    REQUIRE(narrow_min > 64.0 * 1e-3);
}
