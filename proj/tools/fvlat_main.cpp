// fvlat: run signalling/factorisation experiments from a JSON config and emit
// a deterministic report. Exit codes: 0 all checks pass, 1 a physics check
// failed, 2 usage or config error.

#include "fv/config.hpp"
#include "fv/errors.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

int main(int argc, char** argv) {
    CLI::App app{"finite-lattice measurement-framework verifier"};
    std::string config_path;
    std::string out_path;
    std::string format = "json";
    std::optional<std::uint64_t> seed;
    std::optional<double> tolerance;
    std::optional<int> trials;
    app.add_option("--config", config_path, "experiment config (JSON)")->required();
    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--tolerance", tolerance, "override the config tolerance");
    app.add_option("--trials", trials, "override the trial count");
    app.add_option("--out", out_path, "report output path (default: stdout)");
    app.add_option("--format", format, "json | csv")
        ->check(CLI::IsMember({"json", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        fv::ExperimentConfig cfg = fv::parse_config(config_path);
        if (seed) cfg.seed = *seed;
        if (tolerance) cfg.tolerance = *tolerance;
        if (trials) cfg.trials = *trials;

        const fv::RunResult result = fv::run_experiment(cfg);
        std::string payload;
        if (format == "csv") {
            if (result.csv.empty()) {
                std::cerr << "error: csv output is only produced by campaign configs\n";
                return 2;
            }
            payload = result.csv;
        } else {
            payload = fv::dump_report(result.report);
        }
        if (out_path.empty()) {
            std::cout << payload;
        } else {
            std::ofstream out(out_path, std::ios::binary);
            if (!out) {
                std::cerr << "error: cannot write '" << out_path << "'\n";
                return 2;
            }
            out << payload;
        }
        return result.exit_code;
    } catch (const fv::NoWitnessFound& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const fv::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
