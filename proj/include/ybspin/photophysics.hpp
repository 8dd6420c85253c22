#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "ybspin/constants.hpp"
#include "ybspin/spectra.hpp"

namespace ybspin {

struct OpticalMedium {
    double n_parallel = 1.0;
    double n_perpendicular = 1.0;
    double wavelength0_m = 0.0; // vacuum wavelength

    void validate() const;
    double index(Polarization pol) const {
        return pol == Polarization::pi ? n_parallel : n_perpendicular;
    }
};

/// Measured integrated absorption of one line, with the level bookkeeping
/// needed to convert it into per-ion quantities. `excited_levels` lists the
/// excited levels reached by the line (from the adjacency table).
struct AbsorptionRecord {
    std::string label;
    Polarization pol = Polarization::pi;
    double integrated_alpha_ghz_per_cm = 0.0;
    int originating_level = 1;
    int originating_degeneracy = 1;
    int excited_degeneracy = 1;
    std::vector<int> excited_levels;

    void validate() const;
};

/// Absorption oscillator strength from a polarized integrated absorption
/// coefficient. The sum over the three orthogonal polarization axes of the
/// uniaxial site means a pi line contributes once with n_parallel and a
/// sigma line twice with n_perpendicular. level_population is the Boltzmann
/// fraction in the originating level(s).
double oscillator_strength(const AbsorptionRecord& rec, double number_density_per_cm3,
                           double level_population, const OpticalMedium& medium);

/// f_ji = (g_i / g_j) f_ij.
double emission_oscillator_strength(double f_abs, int gi, int gj);

/// Spontaneous-emission rate (s^-1) from an emission oscillator strength:
/// 1/tau = (2 pi e^2 / eps0 m_e c) ((n^2+2)^2 / 9n) (n^2 / lambda0^2) f_em / 3.
double radiative_rate(double f_em, const OpticalMedium& medium, Polarization pol);

struct RateRecord {
    AbsorptionRecord rec;
    double f_abs = 0.0;
    double f_em = 0.0;
    double rate_hz = 0.0;
};

/// Full Table-style pipeline for one record.
RateRecord absorption_to_rate(const AbsorptionRecord& rec, double number_density_per_cm3,
                              const std::array<double, 4>& populations,
                              const OpticalMedium& medium);

enum class RateAggregation { per_excited_level_mean, arithmetic_mean };

struct AggregateResult {
    double mean_rate_hz = 0.0;
    double tau_rad_s = 0.0;
    std::array<double, 4> per_excited_level_rate_hz{};
};

/// Combine per-line radiative rates into one radiative lifetime. The default
/// averages the total decay rate of each excited hyperfine level (a line
/// reaching several excited levels contributes its rate to each of them);
/// the alternative is the arithmetic mean of the rate column.
AggregateResult aggregate_radiative_rate(std::span<const RateRecord> records,
                                         RateAggregation how = RateAggregation::per_excited_level_mean);

/// beta = tau_f / tau_rad. Values above 1 signal inconsistent inputs and are
/// returned as-is for the caller to warn about.
double branching_ratio(double tau_f_s, double tau_rad_s);

} // namespace ybspin
