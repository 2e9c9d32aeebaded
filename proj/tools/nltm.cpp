// nltm: transfer matrices, scattering amplitudes and bound certificates for
// stationary wave scattering by nonlocal potentials.

#include <iostream>
#include <omp.h>

#include "CLI11.hpp"

#include "commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Transfer-matrix scattering for energy-projected nonlocal potentials", "nltm"};
    app.set_version_flag("--version", nltm::tool_version());
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int threads = 1;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (overrides NLTM_OUT_DIR and output.directory)");
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "random seed (overrides the config)");

    CLI::App* transfer = app.add_subcommand("transfer", "assemble the transfer matrix and its tables");
    CLI::App* scatter = app.add_subcommand("scatter", "scattering amplitudes and cross sections");
    CLI::App* verify = app.add_subcommand("verify", "run bound certificates; exit 0 iff all pass");
    for (CLI::App* sub : {transfer, scatter, verify}) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        nltm::RunConfig config = nltm::load_config(config_path);
        if (seed) config.seed = *seed;
        omp_set_num_threads(threads);
        const std::string command = app.get_subcommands().front()->get_name();
        const nltm::RunContext ctx = nltm::make_context(std::move(config), command, out_dir);
        if (command == "transfer") return nltm::cmd_transfer(ctx);
        if (command == "scatter") return nltm::cmd_scatter(ctx);
        return nltm::cmd_verify(ctx);
    } catch (const nltm::ConfigError& e) {
        std::cerr << "nltm: config error: " << e.what() << "\n";
        return nltm::kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "nltm: " << e.what() << "\n";
        return nltm::kExitFailed;
    }
}
