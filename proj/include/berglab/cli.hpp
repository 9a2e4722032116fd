#pragma once

#include "berglab/report.hpp"

#include <optional>
#include <string>
#include <vector>

namespace berglab {

enum class Command { Solve, Dual, Berg, CriticalB, Perturb, Sweep, Converge, Continuity };

std::string to_string(Command c);

/// Everything a run depends on. Output location and --assert do not enter the hash.
struct RunConfig {
    Command command = Command::Solve;
    double r1 = 1.0;
    double r2 = 1.0;
    double lambda0 = 2.0;
    double eps = 0.0;
    double a = 1.0;
    double b = 1.0;
    MeshParams mesh{4, 1.2, 1, 1e-10};
    double solver_tol = 1e-12;
    int max_iter = 50000;
    double tol_sign = 1e-3;
    double r_excl = 0.0;
    double cutoff_radius = 0.0;
    /// Absolute eps values; empty selects the command default (multiples of r1).
    std::vector<double> eps_grid;
    std::vector<double> ratios{0.5, 0.75, 1.0, 1.5, 2.0};
    bool transposed = false;
    OuterBoundary outer = OuterBoundary::Scaled;
    std::string convergence_case = "manufactured-smooth";
    double margin = 0.1;
    std::string output_dir = "berg_out";
    bool assert_mode = false;

    Json to_json() const;
    /// FNV-1a of the canonical JSON form.
    std::string hash() const;
    ExperimentOptions experiment_options() const;
};

/// Throws InvalidArgument naming the offending field.
void validate(const RunConfig& config);

struct ParseResult {
    std::optional<RunConfig> config;
    int exit_code = 0; ///< meaningful when config is empty: 0 after --help, 2 on errors
    std::string message;
};

/// Flags override values read through --config (flat TOML keys named like the flags).
ParseResult parse_config(int argc, const char* const* argv);

struct RunOutcome {
    int exit_code = 0;
    std::string report_path;
    Json report;
};

/// Writes report.json and the command's CSV/SVG files into
/// <output_dir>/<command>-<hash>/, where BERG_LAB_OUT overrides output_dir.
/// Exit codes: 0 success, 1 compute failure, 2 invalid input, 3 failed assertion with --assert.
RunOutcome run(const RunConfig& config);

int cli_main(int argc, const char* const* argv);

} // namespace berglab
