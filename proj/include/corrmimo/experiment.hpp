#pragma once

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "corrmimo/metrics.hpp"
#include "corrmimo/selfcheck.hpp"

namespace corrmimo {

/// Invalid configuration; `field` names the offending entry.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error("config field '" + field + "': " + message),
          field_(std::move(field)) {}
    const std::string& field() const { return field_; }

  private:
    std::string field_;
};

struct ExperimentConfig {
    std::string experiment = "experiment";
    ChannelModel model;
    Eigen::Index m = 1;
    std::vector<double> snr_grid_db;
    std::int64_t trials = 0;
    std::uint64_t seed = 1;
    Constellation constellation = Constellation::qpsk();
    std::vector<SchemeKind> schemes;
    SchemeKind benchmark = SchemeKind::perf_unconst;
    double alpha = 2.0;
    std::string output = "sweep.csv";
};

namespace detail {

inline RealVector json_vector(const nlohmann::json& j, const std::string& field) {
    if (!j.is_array() || j.empty()) throw ConfigError(field, "must be a non-empty array");
    RealVector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(field, "must contain numbers only");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

inline ComplexMatrix unitary_from_choice(const std::string& choice, Eigen::Index n,
                                         std::uint64_t seed, std::uint64_t salt,
                                         const std::string& field) {
    if (choice == "identity") return ComplexMatrix::Identity(n, n);
    if (choice == "seeded-random") {
        Rng rng(seed ^ (0xA5A5A5A5A5A5A5A5ULL + salt));
        return random_unitary(rng, n);
    }
    throw ConfigError(field, "must be 'identity' or 'seeded-random'");
}

inline std::string fmt9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace detail

namespace detail {

inline ExperimentConfig parse_config_impl(const nlohmann::json& j) {
    ExperimentConfig cfg;
    if (j.contains("experiment")) {
        if (!j["experiment"].is_string()) throw ConfigError("experiment", "must be a string");
        cfg.experiment = j["experiment"].get<std::string>();
    }

    if (!j.contains("model") || !j["model"].is_object())
        throw ConfigError("model", "must be an object");
    const auto& jm = j["model"];
    if (!jm.contains("kind") || !jm["kind"].is_string())
        throw ConfigError("model.kind", "must be 'separable' or 'canonical'");
    const std::string kind = jm["kind"].get<std::string>();
    const std::string unitary =
        jm.contains("unitary") ? jm["unitary"].get<std::string>() : std::string("identity");

    std::uint64_t seed = 1;
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            throw ConfigError("seed", "must be a non-negative integer");
        seed = j["seed"].get<std::uint64_t>();
    }
    cfg.seed = seed;

    try {
        if (kind == "separable") {
            SeparableModel model;
            if (!jm.contains("lambda_t")) throw ConfigError("model.lambda_t", "missing");
            if (!jm.contains("lambda_r")) throw ConfigError("model.lambda_r", "missing");
            model.lambda_t = detail::json_vector(jm["lambda_t"], "model.lambda_t");
            model.lambda_r = detail::json_vector(jm["lambda_r"], "model.lambda_r");
            model.u_t = detail::unitary_from_choice(unitary, model.lambda_t.size(), seed, 1,
                                                    "model.unitary");
            model.u_r = detail::unitary_from_choice(unitary, model.lambda_r.size(), seed, 2,
                                                    "model.unitary");
            validate_model(model);
            cfg.model = model;
        } else if (kind == "canonical") {
            CanonicalModel model;
            if (!jm.contains("variance_profile") || !jm["variance_profile"].is_array() ||
                jm["variance_profile"].empty())
                throw ConfigError("model.variance_profile", "must be an array of row arrays");
            const auto& rows = jm["variance_profile"];
            const Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
            const Eigen::Index nt = static_cast<Eigen::Index>(rows[0].size());
            model.variance_profile = RealMatrix(nr, nt);
            for (Eigen::Index i = 0; i < nr; ++i) {
                if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != nt)
                    throw ConfigError("model.variance_profile", "rows must have equal length");
                for (Eigen::Index k = 0; k < nt; ++k)
                    model.variance_profile(i, k) =
                        rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]
                            .get<double>();
            }
            model.u_t = detail::unitary_from_choice(unitary, nt, seed, 1, "model.unitary");
            model.u_r = detail::unitary_from_choice(unitary, nr, seed, 2, "model.unitary");
            validate_model(model);
            cfg.model = model;
        } else {
            throw ConfigError("model.kind", "must be 'separable' or 'canonical'");
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError("model", e.what());
    }

    if (!j.contains("m") || !j["m"].is_number_integer())
        throw ConfigError("m", "must be an integer stream count");
    cfg.m = j["m"].get<Eigen::Index>();
    if (cfg.m < 1 || cfg.m > tx_dim(cfg.model))
        throw ConfigError("m", "must satisfy 1 <= m <= N_t");

    if (!j.contains("snr_grid_db")) throw ConfigError("snr_grid_db", "missing");
    const RealVector grid = detail::json_vector(j["snr_grid_db"], "snr_grid_db");
    for (Eigen::Index i = 0; i + 1 < grid.size(); ++i)
        if (grid(i) >= grid(i + 1))
            throw ConfigError("snr_grid_db", "must be strictly increasing");
    cfg.snr_grid_db.assign(grid.data(), grid.data() + grid.size());

    if (!j.contains("trials") || !j["trials"].is_number_integer())
        throw ConfigError("trials", "must be an integer");
    cfg.trials = j["trials"].get<std::int64_t>();
    if (cfg.trials < 1) throw ConfigError("trials", "must be >= 1");

    if (j.contains("constellation")) {
        const auto& jc = j["constellation"];
        if (jc.is_string()) {
            const std::string name = jc.get<std::string>();
            if (name == "bpsk")
                cfg.constellation = Constellation::bpsk();
            else if (name == "qpsk")
                cfg.constellation = Constellation::qpsk();
            else
                throw ConfigError("constellation", "unknown preset '" + name + "'");
        } else if (jc.is_object() && jc.contains("alpha") && jc.contains("beta")) {
            const double a = jc["alpha"].get<double>(), b = jc["beta"].get<double>();
            if (!(a > 0.0) || !(b > 0.0))
                throw ConfigError("constellation", "alpha and beta must be positive");
            cfg.constellation = Constellation::custom(a, b);
        } else {
            throw ConfigError("constellation", "must be a preset name or {alpha, beta}");
        }
    }

    if (!j.contains("schemes") || !j["schemes"].is_array() || j["schemes"].empty())
        throw ConfigError("schemes", "must be a non-empty array of scheme names");
    for (const auto& s : j["schemes"]) {
        try {
            cfg.schemes.push_back(scheme_from_string(s.get<std::string>()));
        } catch (const std::invalid_argument& e) {
            throw ConfigError("schemes", e.what());
        }
    }
    if (j.contains("benchmark")) {
        try {
            cfg.benchmark = scheme_from_string(j["benchmark"].get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw ConfigError("benchmark", e.what());
        }
    }
    if (j.contains("alpha")) {
        cfg.alpha = j["alpha"].get<double>();
        if (!(cfg.alpha > 1.0)) throw ConfigError("alpha", "must exceed 1");
    }
    if (j.contains("output")) cfg.output = j["output"].get<std::string>();
    return cfg;
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    try {
        return detail::parse_config_impl(j);
    } catch (const nlohmann::json::exception& e) {
        // type errors on document access count as invalid configuration
        throw ConfigError("(document)", e.what());
    }
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("(file)", "cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("(file)", std::string("JSON parse error: ") + e.what());
    }
    return parse_config(j);
}

namespace detail {

class CsvBuilder {
  public:
    CsvBuilder() { out_ << "experiment,snr_db,scheme,metric,mean,stderr,trials,seed\n"; }

    void row(const std::string& experiment, double snr_db, const std::string& scheme,
             const std::string& metric, double mean, double std_error, std::int64_t trials,
             std::uint64_t seed) {
        out_ << experiment << ',' << fmt9(snr_db) << ',' << scheme << ',' << metric << ','
             << fmt9(mean) << ',' << fmt9(std_error) << ',' << trials << ',' << seed << '\n';
    }

    std::string str() const { return out_.str(); }

  private:
    std::ostringstream out_;
};

inline void append_delta_rows(CsvBuilder& csv, const std::string& experiment, double snr_db,
                              const std::string& scheme, const DeltaReport& rep,
                              std::int64_t trials, std::uint64_t seed) {
    csv.row(experiment, snr_db, scheme, "delta_i", rep.delta_i.mean, rep.delta_i.std_error,
            trials, seed);
    csv.row(experiment, snr_db, scheme, "delta_i1", rep.delta_i1.mean, rep.delta_i1.std_error,
            trials, seed);
    csv.row(experiment, snr_db, scheme, "delta_i2", rep.delta_i2.mean, rep.delta_i2.std_error,
            trials, seed);
    csv.row(experiment, snr_db, scheme, "delta_i_tilde2", rep.delta_i_tilde2.mean,
            rep.delta_i_tilde2.std_error, rep.delta_i_tilde2.trials, seed);
    csv.row(experiment, snr_db, scheme, "delta_p", rep.delta_p.mean, rep.delta_p.std_error,
            rep.delta_p.trials, seed);
    csv.row(experiment, snr_db, scheme, "delta_mse", rep.delta_mse.mean, rep.delta_mse.std_error,
            rep.delta_mse.trials, seed);
}

}  // namespace detail

/// Runs the configured sweep and returns the CSV text (header included).
inline std::string run_to_csv(const ExperimentConfig& cfg) {
    detail::CsvBuilder csv;
    for (const double snr_db : cfg.snr_grid_db) {
        const double rho = db_to_linear(snr_db);
        bool benchmark_emitted = false;
        for (const SchemeKind scheme : cfg.schemes) {
            DeltaOptions opts;
            opts.constellation = cfg.constellation;
            opts.trials = cfg.trials;
            opts.seed = cfg.seed;
            opts.alpha = cfg.alpha;
            const DeltaReport rep =
                estimate_delta(cfg.model, cfg.m, rho, cfg.benchmark, scheme, opts);

            if (!benchmark_emitted) {
                csv.row(cfg.experiment, snr_db, to_string(cfg.benchmark), "mutual_info_bits",
                        rep.benchmark_info_bits.mean, rep.benchmark_info_bits.std_error,
                        cfg.trials, cfg.seed);
                csv.row(cfg.experiment, snr_db, to_string(cfg.benchmark), "p_err_avg",
                        rep.benchmark_p_avg.mean, rep.benchmark_p_avg.std_error, cfg.trials,
                        cfg.seed);
                benchmark_emitted = true;
            }
            if (scheme == cfg.benchmark) continue;
            csv.row(cfg.experiment, snr_db, to_string(scheme), "mutual_info_bits",
                    rep.test_info_bits.mean, rep.test_info_bits.std_error, cfg.trials, cfg.seed);
            csv.row(cfg.experiment, snr_db, to_string(scheme), "p_err_avg", rep.test_p_avg.mean,
                    rep.test_p_avg.std_error, cfg.trials, cfg.seed);
            detail::append_delta_rows(csv, cfg.experiment, snr_db, to_string(scheme), rep,
                                      cfg.trials, cfg.seed);
        }
    }
    return csv.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    out << content;
}

inline void run_experiment(const ExperimentConfig& cfg) { write_file(cfg.output, run_to_csv(cfg)); }

namespace detail {

inline MCEstimate expected_info(const ChannelModel& model, Eigen::Index m, double rho,
                                SchemeKind scheme, std::int64_t trials, std::uint64_t seed,
                                double alpha) {
    DeltaOptions opts;
    opts.trials = trials;
    opts.seed = seed;
    opts.alpha = alpha;
    const DeltaReport rep = estimate_delta(model, m, rho, scheme, scheme, opts);
    return rep.test_info_bits;
}

}  // namespace detail

/// Default trial counts per reproduce target (overridable by the caller).
inline std::int64_t default_reproduce_trials(const std::string& figure) {
    if (figure == "fig2") return 2000;
    return 10000;
}

/// Emits the CSV text behind one of the study figures.
inline std::string reproduce_to_csv(const std::string& figure, std::int64_t trials,
                                    std::uint64_t seed) {
    detail::CsvBuilder csv;

    if (figure == "fig1") {
        Rng rng(seed);
        const ChannelModel matched{make_matched(4, 4, 2, 16.0, rng)};
        const ChannelModel mismatched{
            make_mismatched(4, 4, 2, 16.0, MismatchProfile{1.0, 1.0}, rng)};
        for (double snr_db = -10.0; snr_db <= 30.0; snr_db += 2.0) {
            const double rho = db_to_linear(snr_db);
            const auto emit = [&](const char* name, const ChannelModel& model, SchemeKind kind) {
                const MCEstimate e = detail::expected_info(model, 2, rho, kind, trials, seed, 2.0);
                csv.row("fig1", snr_db, name, "mutual_info_bits", e.mean, e.std_error, trials,
                        seed);
            };
            emit("matched-perf", matched, SchemeKind::perf_semi);
            emit("matched-stat", matched, SchemeKind::stat_semi);
            emit("mismatched-perf", mismatched, SchemeKind::perf_semi);
            emit("mismatched-stat", mismatched, SchemeKind::stat_semi);
        }
    } else if (figure == "fig2") {
        Rng rng(seed);
        const auto family = matching_sweep_family(4, 2, 16.0, 200, rng);
        const double snrs[] = {-10.0, 0.0, 10.0};
        for (const double snr_db : snrs) {
            const double rho = db_to_linear(snr_db);
            for (std::size_t c = 0; c < family.size(); ++c) {
                const ChannelModel model{sweep_model(family[c], 4)};
                char name[16];
                std::snprintf(name, sizeof(name), "chan%03zu", c);
                const double mt = matching_metric_tx(model, 2);
                DeltaOptions opts;
                opts.trials = trials;
                opts.seed = seed;
                const DeltaReport rep = estimate_delta(model, 2, rho, SchemeKind::perf_unconst,
                                                       SchemeKind::stat_semi, opts);
                csv.row("fig2", snr_db, name, "m_t", mt, 0.0, trials, seed);
                csv.row("fig2", snr_db, name, "delta_i", rep.delta_i.mean, rep.delta_i.std_error,
                        trials, seed);
                csv.row("fig2", snr_db, name, "delta_p", rep.delta_p.mean, rep.delta_p.std_error,
                        rep.delta_p.trials, seed);
            }
        }
    } else if (figure == "fig3") {
        const double snr_db = 10.0;
        const double rho = db_to_linear(snr_db);
        for (const Eigen::Index n_r : {4, 8, 16, 32, 64}) {
            SeparableModel model;
            model.lambda_t = RealVector::Ones(4);
            model.lambda_r = RealVector::Constant(n_r, 4.0 / static_cast<double>(n_r));
            model.u_t = ComplexMatrix::Identity(4, 4);
            model.u_r = ComplexMatrix::Identity(n_r, n_r);
            DeltaOptions opts;
            opts.trials = trials;
            opts.seed = seed;
            const DeltaReport rep = estimate_delta(ChannelModel{model}, 2, rho,
                                                   SchemeKind::perf_unconst,
                                                   SchemeKind::stat_semi, opts);
            char name[16];
            std::snprintf(name, sizeof(name), "nr%lld", static_cast<long long>(n_r));
            csv.row("fig3", snr_db, name, "delta_i", rep.delta_i.mean, rep.delta_i.std_error,
                    trials, seed);
            csv.row("fig3", snr_db, name, "delta_p", rep.delta_p.mean, rep.delta_p.std_error,
                    rep.delta_p.trials, seed);
        }
    } else if (figure == "fig4a" || figure == "fig4b") {
        ChannelModel model;
        if (figure == "fig4a") {
            SeparableModel m4;
            m4.lambda_t = RealVector(4);
            m4.lambda_t << 9.80, 5.66, 0.45, 0.09;
            m4.lambda_r = RealVector(4);
            m4.lambda_r << 8.58, 4.20, 1.98, 1.24;
            m4.u_t = ComplexMatrix::Identity(4, 4);
            m4.u_r = ComplexMatrix::Identity(4, 4);
            model = m4;
        } else {
            CanonicalModel m4;
            m4.variance_profile = RealMatrix(4, 4);
            m4.variance_profile << 1.66, 0.31, 1.71, 0.31,  //
                2.24, 0.18, 0.15, 0.54,                     //
                1.97, 1.46, 0.70, 0.28,                     //
                1.65, 1.65, 0.49, 0.71;
            m4.u_t = ComplexMatrix::Identity(4, 4);
            m4.u_r = ComplexMatrix::Identity(4, 4);
            model = m4;
        }
        for (double snr_db = -10.0; snr_db <= 30.0; snr_db += 2.0) {
            const double rho = db_to_linear(snr_db);
            for (const SchemeKind kind :
                 {SchemeKind::stat_semi, SchemeKind::stat_fixed, SchemeKind::perf_semi}) {
                const MCEstimate e =
                    detail::expected_info(model, 2, rho, kind, trials, seed, 2.0);
                csv.row(figure, snr_db, to_string(kind), "mutual_info_bits", e.mean, e.std_error,
                        trials, seed);
            }
        }
    } else {
        throw std::invalid_argument("unknown figure id: " + figure);
    }
    return csv.str();
}

struct SelftestOptions {
    int scale = 1;                         // multiplies per-suite case counts
    double inject_waterfill_error = 0.0;   // fault-injection hook for harness tests
};

/// Fast invariant suite: oracle equivalences, identity checks, majorization
/// properties. Prints one line per suite; returns true iff everything passed.
inline bool selftest(std::ostream& out, const SelftestOptions& options = {}) {
    bool all_ok = true;
    const auto report = [&](const char* name, int cases, int failures,
                            const std::string& detail = "") {
        if (failures == 0) {
            out << "ok " << name << " (" << cases << " cases)\n";
        } else {
            out << "FAIL " << name << ": " << failures << "/" << cases << " cases";
            if (!detail.empty()) out << " (" << detail << ")";
            out << "\n";
            all_ok = false;
        }
    };

    {  // waterfilling closed form vs active-set enumeration
        Rng rng(11);
        const int cases = 1000 * options.scale;
        int failures = 0;
        for (int i = 0; i < cases; ++i) {
            const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.next_u64() % 8);
            RealVector lam(n);
            for (Eigen::Index k = 0; k < n; ++k) lam(k) = 0.05 + 5.0 * rng.next_double();
            lam = sorted_descending(lam);
            const double rho = 0.1 + 10.0 * rng.next_double();
            RealVector ours = waterfill(lam, rho).lambda_wf;
            ours(0) += options.inject_waterfill_error;
            const RealVector ref = selfcheck::waterfill_enumeration(lam, rho);
            if ((ours - ref).cwiseAbs().maxCoeff() > 1e-10) ++failures;
        }
        report("waterfill_vs_enumeration", cases, failures);
    }

    {  // SINR closed form vs definitional filter-output computation
        Rng rng(12);
        const int cases = 200 * options.scale;
        int failures = 0;
        for (int i = 0; i < cases; ++i) {
            const ComplexMatrix h = random_iid_cgaussian(rng, 4, 4);
            Precoder p;
            p.v_f = random_semiunitary(rng, 4, 2);
            p.lambda_f = RealVector::Constant(2, 0.2 + rng.next_double());
            p.rotation = ComplexMatrix::Identity(2, 2);
            p.rho = 0.5 + 8.0 * rng.next_double();
            const RealVector closed = sinr(h, p);
            const RealVector defi = selfcheck::definitional_sinr(h, p.effective());
            const double rel = (closed - defi).cwiseAbs().maxCoeff() /
                               std::max(1.0, closed.cwiseAbs().maxCoeff());
            if (rel > 1e-9) ++failures;
        }
        report("sinr_dual_formula", cases, failures);
    }

    {  // majorization sandwich and reflexivity
        Rng rng(13);
        const int cases = 500 * options.scale;
        int failures = 0;
        for (int i = 0; i < cases; ++i) {
            const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.next_u64() % 6);
            RealVector a(n);
            for (Eigen::Index k = 0; k < n; ++k) a(k) = 0.01 + rng.next_double();
            a /= a.sum();
            const OrderedVector ov = OrderedVector::from(a);
            RealVector low = RealVector::Constant(n, 1.0 / static_cast<double>(n));
            RealVector high = RealVector::Zero(n);
            high(0) = 1.0;
            if (!majorizes(OrderedVector::from(low), ov)) ++failures;
            if (!majorizes(ov, OrderedVector::from(high))) ++failures;
            if (!majorizes(ov, ov)) ++failures;
        }
        report("majorization_sandwich", cases, failures);
    }

    {  // doubly stochastic construction u = v Q
        Rng rng(14);
        const int cases = 200 * options.scale;
        int failures = 0;
        for (int i = 0; i < cases; ++i) {
            const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.next_u64() % 5);
            RealVector v(n);
            for (Eigen::Index k = 0; k < n; ++k) v(k) = rng.next_double();
            v = sorted_descending(v);
            RealVector u = v;
            for (int t = 0; t < 3; ++t) {
                const Eigen::Index ii = static_cast<Eigen::Index>(rng.next_u64() % n);
                Eigen::Index jj = static_cast<Eigen::Index>(rng.next_u64() % n);
                if (jj == ii) jj = (jj + 1) % n;
                const double lam = rng.next_double();
                const double ui = u(ii), uj = u(jj);
                u(ii) = lam * ui + (1.0 - lam) * uj;
                u(jj) = lam * uj + (1.0 - lam) * ui;
            }
            u = sorted_descending(u);
            const auto pair = unitary_stochastic_from_majorization(OrderedVector::from_sorted(u),
                                                                   OrderedVector::from_sorted(v));
            const RealVector recon = pair.q.transpose() * v;
            if ((recon - u).cwiseAbs().maxCoeff() > 1e-10) ++failures;
            if (unitarity_defect(pair.gamma) > 1e-10) ++failures;
        }
        report("unitary_stochastic_construction", cases, failures);
    }

    {  // Q function bounds bracket the quadrature oracle
        int cases = 0, failures = 0;
        for (double x = 1.1; x <= 10.0 + 1e-12; x += 0.1) {
            ++cases;
            const double q = q_function(x);
            const QBounds b = q_bounds(x);
            if (!(b.lower <= q && q <= b.upper)) ++failures;
        }
        if (std::abs(q_function(2.0) - selfcheck::q_quadrature(2.0)) > 1e-12) ++failures;
        report("q_function_bounds", cases, failures);
    }

    {  // matched-channel equality of perfect and statistical semiunitary precoding
        Rng rng(15);
        const int cases = 100 * options.scale;
        int failures = 0;
        const ChannelModel model{make_matched(4, 4, 2, 16.0, rng)};
        for (int i = 0; i < cases; ++i) {
            const ChannelRealization real = sample(model, rng);
            const double i_perf = mutual_info(real.h, perfect_semiunitary(real.h, 2, 4.0));
            const double i_stat = mutual_info(real.h, stat_semiunitary(model, 2, 4.0));
            if (std::abs(i_perf - i_stat) > 1e-9) ++failures;
        }
        report("matched_channel_equality", cases, failures);
    }

    {  // Poincare separation and Schur-Horn majorization
        Rng rng(16);
        const int cases = 200 * options.scale;
        int failures = 0;
        for (int i = 0; i < cases; ++i) {
            const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng.next_u64() % 4);
            const ComplexMatrix a = random_hermitian(rng, n);
            const Eigen::Index r = 1 + static_cast<Eigen::Index>(rng.next_u64() % n);
            if (!poincare_check(a, random_semiunitary(rng, n, r))) ++failures;
            const HermitianEigen eig = hermitian_eig(a);
            RealVector diag(n);
            for (Eigen::Index k = 0; k < n; ++k) diag(k) = a(k, k).real();
            if (!majorizes(OrderedVector::from(diag), OrderedVector::from(eig.eigenvalues)))
                ++failures;
        }
        report("poincare_and_schur_horn", cases, failures);
    }

    {  // K-tuple inequality (x ascending, y descending per its hypothesis)
        Rng rng(17);
        const int cases = 500 * options.scale;
        int failures = 0;
        for (int i = 0; i < cases; ++i) {
            const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.next_u64() % 8);
            RealVector x(n), y(n);
            for (Eigen::Index k = 0; k < n; ++k) {
                x(k) = 0.01 + 3.0 * rng.next_double();
                y(k) = 0.01 + 3.0 * rng.next_double();
            }
            x = RealVector(sorted_descending(x).reverse());
            y = sorted_descending(y);
            if (!k_tuple_inequality_check(x, y)) ++failures;
        }
        report("k_tuple_inequality", cases, failures);
    }

    {  // eigenvalue bounds for products and sums
        Rng rng(18);
        const int cases = 200 * options.scale;
        int failures = 0;
        for (int i = 0; i < cases; ++i) {
            const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng.next_u64() % 7);
            const ComplexMatrix a_psd = random_psd(rng, n);
            const ComplexMatrix b_psd = random_psd(rng, n);
            const RealVector la = hermitian_eig(a_psd).eigenvalues;
            const RealVector lb = hermitian_eig(b_psd).eigenvalues;
            // product bound via the similar Hermitian form B^{1/2} A B^{1/2}
            Eigen::SelfAdjointEigenSolver<ComplexMatrix> esb(b_psd);
            const ComplexMatrix b_half = esb.operatorSqrt();
            const RealVector lprod =
                hermitian_eig(ComplexMatrix(b_half * a_psd * b_half)).eigenvalues;
            const double bmin = lb(lb.size() - 1), bmax = lb(0);
            for (Eigen::Index k = 0; k < n; ++k) {
                if (lprod(k) < la(k) * bmin - 1e-9 || lprod(k) > la(k) * bmax + 1e-9) ++failures;
            }
            const ComplexMatrix ah = random_hermitian(rng, n);
            const ComplexMatrix bh = random_hermitian(rng, n);
            const RealVector lah = hermitian_eig(ah).eigenvalues;
            const RealVector lbh = hermitian_eig(bh).eigenvalues;
            const RealVector lsum = hermitian_eig(ComplexMatrix(ah + bh)).eigenvalues;
            for (Eigen::Index k = 0; k < n; ++k) {
                if (lsum(k) < lah(k) + lbh(n - 1) - 1e-9 || lsum(k) > lah(k) + lbh(0) + 1e-9)
                    ++failures;
            }
            const double trace_ab = (ah * bh).trace().real();
            double von_neumann = 0.0;
            for (Eigen::Index k = 0; k < n; ++k) von_neumann += lah(k) * lbh(k);
            if (trace_ab > von_neumann + 1e-9) ++failures;
        }
        report("eigenvalue_product_sum_bounds", cases, failures);
    }

    {  // partitioned determinant vs direct evaluation
        Rng rng(19);
        const int cases = 200 * options.scale;
        int failures = 0;
        for (int i = 0; i < cases; ++i) {
            const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.next_u64() % 3);
            const ComplexMatrix x = random_iid_cgaussian(rng, n, n);
            const ComplexMatrix y = random_iid_cgaussian(rng, n, n);
            const ComplexMatrix z = random_iid_cgaussian(rng, n, n);
            const ComplexMatrix w =
                random_iid_cgaussian(rng, n, n) + 3.0 * ComplexMatrix::Identity(n, n);
            ComplexMatrix full(2 * n, 2 * n);
            full << x, y, z, w;
            const Complex lhs = block_det(x, y, z, w);
            const Complex rhs = full.determinant();
            if (std::abs(lhs - rhs) > 1e-8 * std::max(1.0, std::abs(rhs))) ++failures;
        }
        report("block_determinant", cases, failures);
    }

    {  // MSE/SINR duality
        Rng rng(20);
        const int cases = 200 * options.scale;
        int failures = 0;
        for (int i = 0; i < cases; ++i) {
            const ComplexMatrix h = random_iid_cgaussian(rng, 4, 4);
            const Precoder p = perfect_semiunitary(h, 2, 1.0 + 5.0 * rng.next_double());
            const RealVector s = sinr(h, p);
            const RealVector e = mse(h, p);
            for (Eigen::Index k = 0; k < 2; ++k)
                if (std::abs(e(k) * (1.0 + s(k)) - 1.0) > 1e-10) ++failures;
        }
        report("mse_sinr_duality", cases, failures);
    }

    out << (all_ok ? "selftest passed\n" : "selftest FAILED\n");
    return all_ok;
}

}  // namespace corrmimo
