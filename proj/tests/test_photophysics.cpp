#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "test_helpers.hpp"
#include "ybspin/photophysics.hpp"

using namespace ybspin;

namespace {

const PhysicalConstants kConsts{};
const OpticalMedium kMedium{2.17, 1.96, 984.5e-9};
constexpr double kNumberDensity = 1.24e18; // cm^-3

struct TableRow {
    const char* label;
    Polarization pol;
    double integrated_alpha;
    double f_printed;       // 1e-6 units
    double rate_printed_hz;
    int level;
    int gi;
    int gj;
    std::vector<int> excited_levels;
};

// Measured integrated absorptions with the printed f and rate columns; level
// assignments from the adjacency table.
const std::vector<TableRow>& table_rows() {
    static const std::vector<TableRow> rows{
        {"A", Polarization::pi, 97.3, 5.4, 1300.0, 4, 1, 1, {2}},
        {"C", Polarization::sigma, 16.4, 1.0, 300.0, 1, 2, 1, {1}},
        {"E", Polarization::pi, 102.7, 5.5, 1400.0, 3, 1, 1, {1}},
        {"F", Polarization::sigma, 17.4, 1.1, 400.0, 1, 2, 1, {2}},
        {"G", Polarization::sigma, 20.2, 2.6, 200.0, 3, 1, 2, {3, 4}},
        {"H", Polarization::sigma, 19.9, 2.6, 200.0, 4, 1, 2, {3, 4}},
        {"I", Polarization::pi, 189.7, 4.9, 1200.0, 1, 2, 2, {3, 4}},
    };
    return rows;
}

AbsorptionRecord record_for(const TableRow& row) {
    AbsorptionRecord rec;
    rec.label = row.label;
    rec.pol = row.pol;
    rec.integrated_alpha_ghz_per_cm = row.integrated_alpha;
    rec.originating_level = row.level;
    rec.originating_degeneracy = row.gi;
    rec.excited_degeneracy = row.gj;
    rec.excited_levels = row.excited_levels;
    return rec;
}

std::array<double, 4> populations_2k() {
    const LevelSet ground = solve_levels(helpers::ground_params(), FieldVector{}, kConsts);
    return boltzmann_populations(ground, 2.0, kConsts);
}

} // namespace

TEST_CASE("oscillator strength of the strongest pi line") {
    const auto populations = populations_2k();
    const AbsorptionRecord rec = record_for(table_rows()[0]); // A
    const double p = populations[3];
    const double f = oscillator_strength(rec, kNumberDensity, p, kMedium);
    CHECK(std::abs(f / 5.4e-6 - 1.0) < 0.10);
}

TEST_CASE("oscillator strength edge behavior") {
    AbsorptionRecord rec = record_for(table_rows()[0]);
    SUBCASE("zero integrated absorption gives zero f") {
        rec.integrated_alpha_ghz_per_cm = 0.0;
        CHECK(oscillator_strength(rec, kNumberDensity, 0.25, kMedium) == 0.0);
    }
    SUBCASE("doubling the number density halves f") {
        const double f1 = oscillator_strength(rec, kNumberDensity, 0.25, kMedium);
        const double f2 = oscillator_strength(rec, 2.0 * kNumberDensity, 0.25, kMedium);
        CHECK(f2 == doctest::Approx(f1 / 2.0).epsilon(1e-12));
    }
    SUBCASE("zero population is rejected") {
        CHECK_THROWS_AS(oscillator_strength(rec, kNumberDensity, 0.0, kMedium),
                        std::invalid_argument);
    }
}

TEST_CASE("emission oscillator strength degeneracy rule") {
    CHECK(emission_oscillator_strength(1e-6, 3, 3) == doctest::Approx(1e-6));
    CHECK(emission_oscillator_strength(1e-6, 2, 1) == doctest::Approx(2e-6));
    const double back = emission_oscillator_strength(emission_oscillator_strength(1e-6, 2, 1), 1, 2);
    CHECK(back == doctest::Approx(1e-6).epsilon(1e-15));
    CHECK_THROWS_AS(emission_oscillator_strength(1e-6, 0, 1), std::invalid_argument);
}

TEST_CASE("radiative rate from the emission oscillator strength") {
    SUBCASE("pi-polarized strong line lands near 1.3 kHz") {
        const double rate = radiative_rate(5.4e-6, kMedium, Polarization::pi);
        CHECK(std::abs(rate / 1300.0 - 1.0) < 0.10);
    }
    SUBCASE("zero f gives zero rate, and the map is linear") {
        CHECK(radiative_rate(0.0, kMedium, Polarization::pi) == 0.0);
        const double r1 = radiative_rate(1e-6, kMedium, Polarization::sigma);
        const double r2 = radiative_rate(2e-6, kMedium, Polarization::sigma);
        CHECK(r2 == doctest::Approx(2.0 * r1).epsilon(1e-12));
    }
}

TEST_CASE("full pipeline reproduces the measured f and rate columns") {
    const auto populations = populations_2k();
    for (const auto& row : table_rows()) {
        const RateRecord rr = absorption_to_rate(record_for(row), kNumberDensity, populations, kMedium);
        CHECK(std::abs(rr.f_abs / (row.f_printed * 1e-6) - 1.0) < 0.10);
        CHECK(std::abs(rr.rate_hz / row.rate_printed_hz - 1.0) < 0.15);
    }
}

TEST_CASE("unit coherence: doubling the integrated absorption doubles f and rate") {
    const auto populations = populations_2k();
    AbsorptionRecord rec = record_for(table_rows()[2]);
    const RateRecord base = absorption_to_rate(rec, kNumberDensity, populations, kMedium);
    rec.integrated_alpha_ghz_per_cm *= 2.0;
    const RateRecord doubled = absorption_to_rate(rec, kNumberDensity, populations, kMedium);
    CHECK(doubled.f_abs == doctest::Approx(2.0 * base.f_abs).epsilon(1e-12));
    CHECK(doubled.rate_hz == doctest::Approx(2.0 * base.rate_hz).epsilon(1e-12));
}

TEST_CASE("aggregate radiative rate") {
    SUBCASE("per-excited-level mean of the printed rate column gives ~590 us") {
        std::vector<RateRecord> records;
        for (const auto& row : table_rows()) {
            RateRecord rr;
            rr.rec = record_for(row);
            rr.rate_hz = row.rate_printed_hz;
            records.push_back(rr);
        }
        const AggregateResult agg = aggregate_radiative_rate(records);
        CHECK(std::abs(agg.tau_rad_s / 590e-6 - 1.0) < 0.15);
    }
    SUBCASE("computed pipeline rates land even closer") {
        const auto populations = populations_2k();
        std::vector<RateRecord> records;
        for (const auto& row : table_rows()) {
            records.push_back(absorption_to_rate(record_for(row), kNumberDensity, populations, kMedium));
        }
        const AggregateResult agg = aggregate_radiative_rate(records);
        CHECK(std::abs(agg.tau_rad_s / 590e-6 - 1.0) < 0.05);
    }
    SUBCASE("single record aggregates to itself") {
        RateRecord rr;
        rr.rec = record_for(table_rows()[0]);
        rr.rate_hz = 1234.5;
        const AggregateResult agg = aggregate_radiative_rate(std::vector<RateRecord>{rr});
        CHECK(agg.mean_rate_hz == doctest::Approx(1234.5));
    }
    SUBCASE("arithmetic mean mode returns the common value for equal records") {
        std::vector<RateRecord> records(3);
        for (auto& rr : records) rr.rate_hz = 777.0;
        const AggregateResult agg =
            aggregate_radiative_rate(records, RateAggregation::arithmetic_mean);
        CHECK(agg.mean_rate_hz == doctest::Approx(777.0));
    }
    SUBCASE("empty input is rejected") {
        CHECK_THROWS_AS(aggregate_radiative_rate(std::vector<RateRecord>{}), std::invalid_argument);
    }
}

TEST_CASE("branching ratio") {
    CHECK(branching_ratio(267e-6, 590e-6) == doctest::Approx(0.4525).epsilon(1e-3));
    CHECK(branching_ratio(1e-3, 1e-3) == doctest::Approx(1.0));
    CHECK_THROWS_AS(branching_ratio(0.0, 590e-6), std::invalid_argument);
    CHECK_THROWS_AS(branching_ratio(267e-6, -1.0), std::invalid_argument);
}

TEST_CASE("branching ratio from the measured lifetime and the aggregated rate") {
    const auto populations = populations_2k();
    std::vector<RateRecord> records;
    for (const auto& row : table_rows()) {
        records.push_back(absorption_to_rate(record_for(row), kNumberDensity, populations, kMedium));
    }
    const AggregateResult agg = aggregate_radiative_rate(records);
    const double beta = branching_ratio(267e-6, agg.tau_rad_s);
    CHECK(beta > 0.40);
    CHECK(beta < 0.50);
}

TEST_CASE("medium validation") {
    const OpticalMedium low_index{0.9, 1.96, 984.5e-9};
    const OpticalMedium far_infrared{2.17, 1.96, 5e-6};
    CHECK_THROWS_AS(low_index.validate(), std::invalid_argument);
    CHECK_THROWS_AS(far_infrared.validate(), std::invalid_argument);
}
