#pragma once

#include <cmath>
#include <stdexcept>

namespace ybspin {

/// Magnetic and thermal constants expressed as frequencies (E/h), so that
/// every Hamiltonian matrix element is in GHz. Defaults are CODATA values.
struct PhysicalConstants {
    double bohr_magneton_ghz_per_t = 13.9962449;      // mu_B/h
    double nuclear_magneton_ghz_per_t = 7.6225932e-3; // mu_n/h
    double boltzmann_ghz_per_k = 20.836619;           // k_B/h

    void validate() const {
        if (!(bohr_magneton_ghz_per_t > 0.0) || !(nuclear_magneton_ghz_per_t > 0.0) ||
            !(boltzmann_ghz_per_k > 0.0)) {
            throw std::invalid_argument("PhysicalConstants: all constants must be positive");
        }
        const double ratio = bohr_magneton_ghz_per_t / nuclear_magneton_ghz_per_t;
        if (std::abs(ratio / 1836.15 - 1.0) > 1e-3) {
            throw std::invalid_argument(
                "PhysicalConstants: mu_B/mu_n must equal the electron/nucleon mass ratio");
        }
    }
};

// SI constants used by the oscillator-strength / radiative-rate conversions.
namespace si {
inline constexpr double electron_mass_kg = 9.1093837015e-31;
inline constexpr double elementary_charge_c = 1.602176634e-19;
inline constexpr double vacuum_permittivity_f_per_m = 8.8541878128e-12;
inline constexpr double speed_of_light_m_per_s = 2.99792458e8;
} // namespace si

} // namespace ybspin
