// bfda command-line driver: run | sweep | verify | bounds
#include <iostream>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "bfda/bfda.hpp"

namespace {

bfda::ExperimentConfig load(const std::string& path, const std::string& output, long long seed) {
    auto c = bfda::parse_config_file(path);
    if (!output.empty()) c.output = output;
    if (seed >= 0) c.seed = static_cast<std::uint64_t>(seed);
    return c;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Brinkman-Forchheimer data assimilation experiments"};
    app.require_subcommand(1);
    std::string config, output;
    long long seed = -1;
    int threads = 1;
    double fault = 0.0;

    auto* run = app.add_subcommand("run", "spin up, assimilate, fit and verify one configuration");
    auto* sweep = app.add_subcommand("sweep", "run the cartesian product of the sweep.* axes");
    auto* verify = app.add_subcommand("verify", "property suite of the spectral operators");
    auto* bounds = app.add_subcommand("bounds", "evaluate the constant ladder and hypotheses without simulating");
    for (auto* s : {run, sweep, bounds}) {
        s->add_option("config", config, "config file")->required();
        s->add_option("--output,-o", output, "output directory (overrides run.output)");
        s->add_option("--seed", seed, "overrides run.seed");
    }
    sweep->add_option("--threads,-j", threads, "worker threads")->check(CLI::PositiveNumber);
    verify->add_option("--seed", seed, "property-suite seed");
    verify->add_option("--inject-leray-fault", fault, "perturb the projection (self-test of the suite)")->group("");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*verify) return bfda::cmd_verify(std::cout, seed >= 0 ? std::uint64_t(seed) : 12345u, fault);
        const auto c = load(config, output, seed);
        if (*run) return bfda::cmd_run(c, c.output, std::cout);
        if (*sweep) return bfda::cmd_sweep(c, c.output, threads, std::cout);
        return bfda::cmd_bounds(c, c.output, std::cout);
    } catch (const bfda::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return bfda::kExitConfig;
    } catch (const bfda::InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return bfda::kExitConfig;
    } catch (const bfda::BlowUp& e) {
        std::cerr << "error: " << e.what() << "\n";
        return bfda::kExitBlowUp;
    }
}
