#pragma once

#include <optional>
#include <string>

#include "monofk/geometry.hpp"
#include "monofk/spectral.hpp"

namespace monofk {

inline constexpr const char* kVersion = "0.1.0";

/// Shared run parameters; each command consumes the subset it needs.
/// Populated from a JSON config file and/or command-line flags (flags win).
struct RunConfig {
    int charge = 1;
    double delta = 0.5;
    double switch_margin = 0.5;
    uint64_t seed = 2024;
    long n_paths = 20000;
    int n_steps = 5000;
    double t = 0.5;
    Point3 x{0.0, 0.0, 2.0};
    std::optional<SectionInD> section; // default: single (ell=|n|, m=0) bump term
    double c_budget = 0.5;             // discretization budget coefficient
    int holonomy_segments = 10000;
    std::string csv_path;              // optional CSV emission (convergence)
};

/// Parse a config JSON document (any unknown keys rejected).
RunConfig run_config_from_json(const std::string& text);

/// Reports are JSON documents; commands return the serialized text.
/// Every pass/fail entry cites the tolerance it used. Exit status is
/// 0 iff all checks passed.
struct CommandResult {
    std::string report_json;
    bool all_passed = false;
};

CommandResult cmd_geometry(const RunConfig& cfg);
CommandResult cmd_spectral(const RunConfig& cfg);
CommandResult cmd_fk(const RunConfig& cfg);
CommandResult cmd_convergence(const RunConfig& cfg);

} // namespace monofk
