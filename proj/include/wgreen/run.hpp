#pragma once

#include <string>
#include <vector>

#include "wgreen/config.hpp"

namespace wgreen::run {

struct RunOutput {
    std::vector<std::string> files; ///< paths written
    std::string summary;            ///< human-readable result, printed by the CLI
};

RunOutput run_modes(const Scenario& sc, const std::string& outdir);
RunOutput run_green(const Scenario& sc, const std::string& outdir);
RunOutput run_field(const Scenario& sc, const std::string& outdir);
RunOutput run_perturb(const Scenario& sc, const std::string& outdir);
RunOutput run_picard(const Scenario& sc, const std::string& outdir);
RunOutput run_estimates(const Scenario& sc, const std::string& outdir);

/// Dispatch on sc.kind.
RunOutput run(const Scenario& sc, const std::string& outdir);

/// Gaussian source of the scenario, truncated to exact zero outside six
/// standard widths so its support is compact.
field::ComplexField gaussian_source(const Scenario& sc, const field::Grid2D& grid);

/// Resolves eps, consulting the computed threshold when map.eps0_fraction
/// is used. Returns {eps, eps0}.
std::pair<double, double> resolve_eps(const Scenario& sc);

} // namespace wgreen::run
