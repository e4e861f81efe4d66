// Batch runner: mcqed <subcommand> --config <file> [--out <dir>] [--seed <u64>]

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mcqed/cli/config.hpp"
#include "mcqed/cli/scenario.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct Options {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
};

int run(const std::string& subcommand, const Options& opt) {
    using namespace mcqed;
    try {
        auto cfg = cli::parse_config(opt.config);
        if (cli::subcommand_for(cfg.kind) != subcommand) {
            std::cerr << "error: scenario '" << cli::to_string(cfg.kind) << "' runs under '"
                      << cli::subcommand_for(cfg.kind) << "', not '" << subcommand << "'\n";
            return kExitValidation;
        }
        if (opt.seed) cfg.seed = *opt.seed;
        const auto res = cli::run_scenario(cfg, opt.out);
        std::cout << res.report;
        for (const auto& e : res.manifest) std::cout << "wrote " << opt.out << "/" << e.file << "\n";
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Majorana equation in circuit QED: simulations and checks"};
    app.require_subcommand(1);
    Options opt;
    std::string chosen;
    for (const char* name :
         {"evolve", "validate-rwa", "composite", "measure-helicity", "readout", "sweep"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", opt.config, "scenario file (YAML)")->required();
        sub->add_option("--out", opt.out, "output directory")->capture_default_str();
        sub->add_option("--seed", opt.seed, "random seed (overrides the config)");
        sub->callback([&chosen, name] { chosen = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }
    return run(chosen, opt);
}
