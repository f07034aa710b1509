#include "warntriage/config.hpp"
#include "warntriage/pipeline.hpp"

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif

#include <filesystem>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
    using namespace warntriage;

    CLI::App app{"Rank static-analysis warnings by how likely they are to be real bugs"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out;
    std::string seed;
    for (const auto& name : command_names()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "key = value configuration file")->required();
        sub->add_option("--seed", seed, "overrides the configured seed");
        sub->add_option("--out", out, "overrides the configured output directory");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_code::kConfig;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    Config cfg;
    try {
        cfg = Config::load(config_path);
        cfg.apply_environment();
        if (!seed.empty()) cfg.set("seed", seed, "--seed");
        if (!out.empty()) cfg.set("out", std::filesystem::absolute(out).string(), "--out");
        cfg.seed();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_code::kConfig;
    }
    return run_command(command, cfg, std::cout, std::cerr);
}
