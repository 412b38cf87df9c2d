#include "apfold/app/config.hpp"
#include "apfold/app/scenario.hpp"
#include "apfold/error.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

namespace {

using apfold::app::ScenarioConfig;

struct CommonOptions {
    std::string config_path;
    std::string output;
};

void add_common(CLI::App* sub, CommonOptions& common) {
    sub->add_option("-c,--config", common.config_path, "Scenario INI file (default: the canonical instance)")
        ->check(CLI::ExistingFile);
    sub->add_option("-o,--output", common.output, "Output directory (overrides APFOLD_OUTPUT_DIR and [run] output_dir)");
}

ScenarioConfig load(const CommonOptions& common) {
    return common.config_path.empty() ? apfold::app::canonical_scenario() : apfold::app::load_config(common.config_path);
}

void print_manifest(const apfold::app::RunManifest& m) {
    std::printf("%s: %s wrote %zu files to %s\n", m.scenario_id.c_str(), m.command.c_str(), m.files.size(),
                m.output_dir.c_str());
    for (const auto& f : m.files) std::printf("  %-28s %10ju  crc32 %08x\n", f.path.c_str(), f.bytes, f.crc32);
    double total = 0.0;
    for (const auto& [name, secs] : m.stage_seconds) total += secs;
    std::printf("  %.3f s\n", total);
}

int run_single(ScenarioConfig config, const CommonOptions& common) {
    const auto manifest = common.output.empty() ? apfold::app::run_scenario(config)
                                                : apfold::app::run_scenario(config, common.output);
    print_manifest(manifest);
    if (manifest.status == 3) std::fprintf(stderr, "verification failed\n");
    if (manifest.status == 2) std::fprintf(stderr, "solve did not converge\n");
    return manifest.status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fold and multiplicity analysis for radial semilinear problems -Delta u = P (g(u) + t phi1 + f1)"};
    app.require_subcommand(1);

    CommonOptions common;
    double t = std::nan("");
    std::string method;
    std::string start;
    std::string solutions;
    long long seed = -1;
    std::vector<std::string> sweep_configs;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());

    auto* check = app.add_subcommand("check", "Hypothesis checks on the weight and nonlinearity");
    add_common(check, common);
    check->add_option("--seed", seed, "Seed for the randomized checks");
    auto* eigen = app.add_subcommand("eigen", "First eigenpair: eigen.csv and eigen.json");
    add_common(eigen, common);
    auto* solve = app.add_subcommand("solve", "One solution at a given t");
    add_common(solve, common);
    solve->add_option("--method", method, "monotone, newton or picard")
        ->check(CLI::IsMember({"monotone", "newton", "picard"}));
    solve->add_option("--t", t, "Coefficient of phi1");
    solve->add_option("--start", start, "Start profile CSV (columns r,u)")->check(CLI::ExistingFile);
    auto* branch = app.add_subcommand("branch", "Solution branch: branch.csv");
    add_common(branch, common);
    auto* alpha = app.add_subcommand("alpha", "Fold location by arclength and bisection: alpha.json");
    add_common(alpha, common);
    auto* two = app.add_subcommand("two", "Both solutions below the fold");
    add_common(two, common);
    two->add_option("--t", t, "Query t (default alpha - 0.5 (1 + |alpha|))");
    auto* verify = app.add_subcommand("verify", "Verify every profile CSV in a directory");
    add_common(verify, common);
    verify->add_option("--solutions", solutions, "Directory of profile CSVs with JSON metadata")
        ->required()
        ->check(CLI::ExistingDirectory);
    auto* sweep = app.add_subcommand("sweep", "Run several scenario files concurrently");
    sweep->add_option("configs", sweep_configs, "Scenario INI files")->required()->check(CLI::ExistingFile);
    sweep->add_option("-j,--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    sweep->add_option("-o,--output", common.output, "Summary directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sweep->parsed()) {
            const auto items = apfold::app::run_sweep(sweep_configs, jobs);
            nlohmann::json summary = nlohmann::json::array();
            int worst = 0;
            for (const auto& item : items) {
                worst = std::max(worst, item.exit_code);
                std::printf("%-40s exit %d %s\n", item.config_path.c_str(), item.exit_code, item.message.c_str());
                summary.push_back({{"config", item.config_path},
                                   {"exit_code", item.exit_code},
                                   {"message", item.message},
                                   {"output_dir", item.manifest.output_dir}});
            }
            apfold::app::RunSettings defaults;
            const std::filesystem::path dir =
                common.output.empty() ? apfold::app::resolve_output_dir(defaults) : std::filesystem::path(common.output);
            std::filesystem::create_directories(dir);
            std::ofstream out(dir / "sweep.json");
            out << summary.dump(2) << "\n";
            return worst;
        }

        ScenarioConfig config = load(common);
        for (auto* sub : app.get_subcommands()) config.run.command = sub->get_name();
        if (!std::isnan(t)) config.run.t = t;
        if (!method.empty()) config.run.method = method;
        if (!start.empty()) config.run.start_file = start;
        if (!solutions.empty()) config.run.solutions_dir = solutions;
        if (seed >= 0) config.run.seed = static_cast<std::uint64_t>(seed);
        return run_single(std::move(config), common);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "apfold: %s\n", e.what());
        return apfold::app::exit_code_for(e);
    }
}
