#pragma once

#include "apfold/app/config.hpp"
#include "apfold/continuation.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace apfold::app {

inline constexpr const char* output_dir_variable = "APFOLD_OUTPUT_DIR";

struct EmittedFile {
    /// Path relative to the output directory.
    std::string path;
    std::uint32_t crc32 = 0;
    std::uintmax_t bytes = 0;
};

struct RunManifest {
    std::string scenario_id;
    std::string command;
    std::string version;
    /// CRC-32 of the serialized config.
    std::uint32_t config_hash = 0;
    std::vector<EmittedFile> files;
    /// Wall-clock seconds per stage, written to timing.json so that
    /// manifest.json stays identical across reruns.
    std::vector<std::pair<std::string, double>> stage_seconds;
    /// 0 success, 2 a solve did not converge, 3 a verification check failed.
    int status = 0;
    std::string output_dir;
};

/// Output directory for a config: $APFOLD_OUTPUT_DIR when set, else
/// run.output_dir.
std::filesystem::path resolve_output_dir(const RunSettings& run);

/// Runs config.run.command, writes its artifacts plus manifest.json and
/// timing.json. Stage failures are rethrown as Error with the stage name
/// prepended to the message.
RunManifest run_scenario(const ScenarioConfig& config);
RunManifest run_scenario(const ScenarioConfig& config, const std::filesystem::path& output_dir);

/// CSV with header "index,t,u_at_0,e0_norm,residual_inf,stability_mu,arclength",
/// one row per point in arclength order. Throws Error(io_error).
void emit_bifurcation(const Branch& branch, const std::filesystem::path& path);

/// Profile CSV with header "r,u,r^{N-2}u".
void write_profile_csv(const RadialGrid& grid, std::span<const double> u, const std::filesystem::path& path);

/// Reads columns r and u from a profile CSV and interpolates onto the grid
/// (linear inside, constant beyond the last row).
Vector read_profile_csv(const RadialGrid& grid, const std::filesystem::path& path);

std::uint32_t crc32_of_file(const std::filesystem::path& path);
std::uint32_t crc32_of_text(const std::string& text);

struct SweepItem {
    std::string config_path;
    int exit_code = 0;
    std::string message;
    RunManifest manifest;
};

/// Runs independent scenarios on `jobs` worker threads; scenario k writes to
/// <output_dir>/<id>. Results come back in input order.
std::vector<SweepItem> run_sweep(const std::vector<std::string>& config_paths, unsigned jobs);

/// Exit code for an exception escaping run_scenario: 1 for config and I/O
/// errors, 2 otherwise.
int exit_code_for(const std::exception& e) noexcept;

}  // namespace apfold::app
