#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ybspin/photophysics.hpp"
#include "ybspin/spectra.hpp"
#include "ybspin/spin_system.hpp"

namespace ybspin {

/// Everything a reproducible run needs: constants, both manifolds, optical
/// medium and sample properties, transition moments, lineshape, and the
/// letter adjacency table. Parsed strictly: unknown keys are rejected.
struct RunConfig {
    PhysicalConstants constants;
    ManifoldParams ground;
    ManifoldParams excited;
    OpticalMedium medium;
    double number_density_per_cm3 = 0.0;
    double temperature_k = 0.0;
    double pi_moment_amplitude = 1.0;
    double sigma_moment_amplitude = 1.0;
    LineshapeParams lineshape;
    std::vector<AdjacencyEntry> adjacency;
    std::optional<double> isotope_moment_ratio;
    NuclearZeeman nuclear_zeeman = NuclearZeeman::folded;

    SpinSystem system() const { return {ground, excited, constants, nuclear_zeeman}; }
    std::vector<TransitionMoment> moments() const {
        return default_moments(pi_moment_amplitude, sigma_moment_amplitude);
    }
    const AdjacencyEntry& adjacency_for(const std::string& letter) const;
};

/// Parse a JSON config (// comments permitted). Errors carry the offending
/// line number and key path.
RunConfig parse_config(const std::string& text, const std::string& origin = "<string>");
RunConfig load_config(const std::string& path);

} // namespace ybspin
