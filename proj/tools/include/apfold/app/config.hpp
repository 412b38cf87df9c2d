#pragma once

#include "apfold/problem.hpp"

#include <cstdint>
#include <limits>
#include <string>

namespace apfold::app {

/// Settings of the [run] section.
struct RunSettings {
    std::string id = "scenario";
    /// check | eigen | solve | branch | alpha | two | verify
    std::string command = "alpha";
    /// solve: monotone | newton | picard
    std::string method = "newton";
    /// Coefficient of phi1 for solve, two and verify; NaN falls back to the
    /// forcing section's t (solve) or to alpha - 0.5 (1 + |alpha|) (two).
    double t = std::numeric_limits<double>::quiet_NaN();
    std::string output_dir = "out";
    /// Seed for the randomized checks run by `check`.
    std::uint64_t seed = 0;
    /// Optional CSV (columns r,u) used as the Newton or Picard start.
    std::string start_file;
    /// Directory scanned by `verify`.
    std::string solutions_dir;

    double newton_tol = 1e-13;
    int newton_maxit = 50;
    double picard_tol = 1e-12;
    int picard_maxit = 2000;
    double monotone_tol = 1e-12;
    /// The branch starts at t = -start_factor * tau*.
    double start_factor = 10.0;
    double ds = 0.25;
    double ds_max = 1.0;
    double continuation_tol = 1e-11;
    double bisect_dt_min = 1e-9;
    /// Plateau supersolution parameters.
    double super_height = 2.0;
    double super_r1 = 5.0;
    double super_r2 = 10.0;
    /// `solve --method monotone` uses the solution at t + monotone_gap as
    /// the upper end when the plateau supersolution does not cover t.
    double monotone_gap = 0.5;
    /// `branch` also writes every branch point as a profile.
    bool write_profiles = false;
    int comparison_samples = 20;
    int nonexistence_starts = 5;
};

struct ScenarioConfig {
    ProblemConfig problem;
    RunSettings run;
};

/// Parses the INI grammar documented in docs/config.md. Throws
/// Error(config_error) with the offending line and field.
ScenarioConfig parse_config(const std::string& text, const std::string& source = "<string>");
ScenarioConfig load_config(const std::string& path);

/// Canonical INI text; parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const ScenarioConfig& config);

/// Canonical problem with default run settings.
ScenarioConfig canonical_scenario();

}  // namespace apfold::app
