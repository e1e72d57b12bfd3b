// concmat: runs concentration experiments described by config files.

#include "concmat/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
namespace cli = concmat::cli;

namespace {

fs::path preset_dir() {
    if (const char* env = std::getenv("CONCMAT_PRESET_DIR"); env && *env) return env;
    return CONCMAT_PRESET_DIR;
}

int default_jobs() {
    if (const char* env = std::getenv("CONCMAT_JOBS"); env && *env) {
        try {
            const int j = std::stoi(env);
            if (j > 0) return j;
        } catch (const std::exception&) {
        }
        std::cerr << "warning: ignoring CONCMAT_JOBS=" << env << "\n";
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo checks of concentration inequalities for random matrices"};
    app.set_version_flag("--version", std::string(cli::kToolVersion));

    std::vector<std::string> configs;
    std::vector<std::string> presets;
    std::string out_dir;
    int jobs = 0;
    std::optional<std::uint64_t> seed_override;
    bool list = false;

    app.add_option("--config", configs, "Experiment config file (repeatable)")->check(CLI::ExistingFile);
    app.add_option("--preset", presets, "Shipped preset by name (repeatable)");
    app.add_option("--out", out_dir, "Directory for JSON and CSV reports");
    app.add_option("--jobs", jobs, "Worker threads (default: CONCMAT_JOBS, then hardware parallelism)")
        ->check(CLI::PositiveNumber);
    app.add_option("--seed-override", seed_override, "Replace every experiment seed");
    app.add_flag("--list-presets", list, "List shipped presets and exit");

    CLI11_PARSE(app, argc, argv);

    try {
        const fs::path pdir = preset_dir();
        if (list) {
            for (const auto& p : cli::list_presets(pdir)) std::cout << p.stem().string() << "\n";
            return 0;
        }
        std::vector<fs::path> files;
        for (const auto& name : presets) {
            fs::path p = pdir / (name + ".cfg");
            if (!fs::exists(p)) {
                std::cerr << "error: unknown preset '" << name << "' (see --list-presets)\n";
                return 1;
            }
            files.push_back(p);
        }
        for (const auto& c : configs) files.emplace_back(c);
        if (files.empty()) {
            std::cerr << "error: nothing to run; pass --config or --preset\n";
            return 1;
        }

        std::vector<cli::ExperimentConfig> all;
        for (const auto& f : files) {
            auto parsed = cli::parse_config(f);
            all.insert(all.end(), parsed.begin(), parsed.end());
        }
        cli::validate_configs(all, "combined configs");

        cli::RunOptions opts;
        opts.jobs = jobs > 0 ? jobs : default_jobs();
        if (!out_dir.empty()) opts.out_dir = fs::path(out_dir);
        opts.seed_override = seed_override;
        opts.summary = &std::cout;
        return cli::run(std::move(all), opts).exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
