#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "corrmimo/corrmimo.hpp"

namespace {

int run_command(const std::string& config_path) {
    try {
        const corrmimo::ExperimentConfig cfg = corrmimo::load_config(config_path);
        corrmimo::run_experiment(cfg);
        return 0;
    } catch (const corrmimo::ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

int reproduce_command(const std::string& figure, std::int64_t trials, std::uint64_t seed,
                      const std::string& out_dir) {
    try {
        const std::int64_t n = trials > 0 ? trials : corrmimo::default_reproduce_trials(figure);
        const std::string csv = corrmimo::reproduce_to_csv(figure, n, seed);
        std::filesystem::create_directories(out_dir);
        const std::string path = out_dir + "/" + figure + ".csv";
        corrmimo::write_file(path, csv);
        std::cout << path << "\n";
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structured precoding simulator for spatially correlated MIMO channels"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "run a JSON-configured sweep, emit CSV");
    run->add_option("config", config_path, "path to the experiment JSON")->required();

    std::string figure;
    std::int64_t trials = 0;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    auto* rep = app.add_subcommand("reproduce", "emit the CSV behind one study figure");
    rep->add_option("figure", figure, "fig1|fig2|fig3|fig4a|fig4b")->required();
    rep->add_option("--trials", trials, "Monte Carlo trials per point (default per figure)");
    rep->add_option("--seed", seed, "master seed");
    rep->add_option("--out", out_dir, "output directory");

    auto* self = app.add_subcommand("selftest", "run the fast invariant suite");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return run_command(config_path);
    if (rep->parsed()) return reproduce_command(figure, trials, seed, out_dir);
    if (self->parsed()) return corrmimo::selftest(std::cout) ? 0 : 1;
    return 2;
}
