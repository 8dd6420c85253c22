#include "ybspin/photophysics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ybspin {

namespace {

double local_field_factor(double n) {
    const double n2 = n * n;
    return 9.0 * n / ((n2 + 2.0) * (n2 + 2.0));
}

} // namespace

void OpticalMedium::validate() const {
    if (!(n_parallel > 1.0) || !(n_perpendicular > 1.0)) {
        throw std::invalid_argument("OpticalMedium: refractive indices must exceed 1");
    }
    if (!(wavelength0_m > 0.3e-6 && wavelength0_m < 3e-6)) {
        throw std::invalid_argument("OpticalMedium: wavelength outside (0.3, 3) micron");
    }
}

void AbsorptionRecord::validate() const {
    if (!(integrated_alpha_ghz_per_cm >= 0.0)) {
        throw std::invalid_argument("AbsorptionRecord: integrated absorption must be >= 0");
    }
    if (originating_level < 1 || originating_level > 4 || originating_degeneracy < 1 ||
        excited_degeneracy < 1) {
        throw std::invalid_argument("AbsorptionRecord: bad level indices or degeneracies");
    }
}

double oscillator_strength(const AbsorptionRecord& rec, double number_density_per_cm3,
                           double level_population, const OpticalMedium& medium) {
    rec.validate();
    medium.validate();
    if (!(number_density_per_cm3 > 0.0)) {
        throw std::invalid_argument("oscillator_strength: number density must be positive");
    }
    if (!(level_population > 0.0 && level_population <= 1.0)) {
        throw std::invalid_argument("oscillator_strength: level population must be in (0, 1]");
    }

    using namespace si;
    const double prefactor = 4.0 * std::numbers::pi * vacuum_permittivity_f_per_m *
                             electron_mass_kg * speed_of_light_m_per_s /
                             (std::numbers::pi * elementary_charge_c * elementary_charge_c);

    // GHz/cm -> (1/m)(1/s); one polarization axis for pi, two for sigma.
    const double integral_si = rec.integrated_alpha_ghz_per_cm * 1e9 * 1e2;
    const int axes = rec.pol == Polarization::pi ? 1 : 2;
    const double pol_sum = axes * local_field_factor(medium.index(rec.pol)) * integral_si;

    const double n_level = number_density_per_cm3 * 1e6 * level_population;
    return prefactor * pol_sum / n_level;
}

double emission_oscillator_strength(double f_abs, int gi, int gj) {
    if (gi < 1 || gj < 1) throw std::invalid_argument("emission_oscillator_strength: degeneracies must be >= 1");
    return static_cast<double>(gi) / static_cast<double>(gj) * f_abs;
}

double radiative_rate(double f_em, const OpticalMedium& medium, Polarization pol) {
    medium.validate();
    if (!(f_em >= 0.0)) throw std::invalid_argument("radiative_rate: f_em must be >= 0");

    using namespace si;
    const double n = medium.index(pol);
    const double prefactor = 2.0 * std::numbers::pi * elementary_charge_c * elementary_charge_c /
                             (vacuum_permittivity_f_per_m * electron_mass_kg * speed_of_light_m_per_s);
    return prefactor / local_field_factor(n) * n * n /
           (medium.wavelength0_m * medium.wavelength0_m) * f_em / 3.0;
}

RateRecord absorption_to_rate(const AbsorptionRecord& rec, double number_density_per_cm3,
                              const std::array<double, 4>& populations,
                              const OpticalMedium& medium) {
    rec.validate();
    double population = 0.0;
    // A degenerate originating pair contributes the population of every
    // member; at zero field the members share the same Boltzmann factor.
    population = populations[static_cast<std::size_t>(rec.originating_level - 1)] *
                 rec.originating_degeneracy;

    RateRecord out;
    out.rec = rec;
    out.f_abs = oscillator_strength(rec, number_density_per_cm3, population, medium);
    out.f_em = emission_oscillator_strength(out.f_abs, rec.originating_degeneracy,
                                            rec.excited_degeneracy);
    out.rate_hz = radiative_rate(out.f_em, medium, rec.pol);
    return out;
}

AggregateResult aggregate_radiative_rate(std::span<const RateRecord> records,
                                         RateAggregation how) {
    if (records.empty()) {
        throw std::invalid_argument("aggregate_radiative_rate: no records");
    }

    AggregateResult result;
    if (how == RateAggregation::arithmetic_mean) {
        double sum = 0.0;
        for (const auto& r : records) sum += r.rate_hz;
        result.mean_rate_hz = sum / static_cast<double>(records.size());
    } else {
        std::array<double, 4> level_rate{};
        std::array<bool, 4> touched{};
        for (const auto& r : records) {
            if (r.rec.excited_levels.empty()) {
                throw std::invalid_argument(
                    "aggregate_radiative_rate: record '" + r.rec.label +
                    "' lacks excited-level assignments needed for per-level aggregation");
            }
            for (int level : r.rec.excited_levels) {
                if (level < 1 || level > 4) {
                    throw std::invalid_argument("aggregate_radiative_rate: excited level out of range");
                }
                level_rate[static_cast<std::size_t>(level - 1)] += r.rate_hz;
                touched[static_cast<std::size_t>(level - 1)] = true;
            }
        }
        double sum = 0.0;
        int n = 0;
        for (std::size_t i = 0; i < 4; ++i) {
            if (!touched[i]) continue;
            sum += level_rate[i];
            ++n;
        }
        result.per_excited_level_rate_hz = level_rate;
        result.mean_rate_hz = sum / n;
    }
    result.tau_rad_s = 1.0 / result.mean_rate_hz;
    return result;
}

double branching_ratio(double tau_f_s, double tau_rad_s) {
    if (!(tau_f_s > 0.0) || !(tau_rad_s > 0.0)) {
        throw std::invalid_argument("branching_ratio: lifetimes must be positive");
    }
    return tau_f_s / tau_rad_s;
}

} // namespace ybspin
