#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "test_helpers.hpp"
#include "ybspin/spectra.hpp"

using namespace ybspin;

namespace {

const PhysicalConstants kConsts{};

std::vector<TransitionLine> zero_field_catalog(const CatalogOptions& opts = {}) {
    return catalog_at(helpers::system(), FieldVector{}, helpers::moments(), opts);
}

std::vector<double> distinct_allowed_freqs(const std::vector<TransitionLine>& catalog,
                                           Polarization pol) {
    std::vector<double> freqs;
    for (const auto& line : catalog) {
        if (line.forbidden || line.pol != pol) continue;
        const bool seen = std::any_of(freqs.begin(), freqs.end(),
                                      [&](double f) { return std::abs(f - line.freq_ghz) < 1e-6; });
        if (!seen) freqs.push_back(line.freq_ghz);
    }
    std::sort(freqs.begin(), freqs.end());
    return freqs;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
    double area = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        area += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    }
    return area;
}

TransitionLine single_line(double freq, double amplitude, Polarization pol = Polarization::pi) {
    TransitionLine line;
    line.freq_ghz = freq;
    line.pol = pol;
    line.amplitude = amplitude;
    line.ground_index = 1;
    line.pairs = {{1, 1}};
    return line;
}

} // namespace

TEST_CASE("zero-field catalog shows 3 pi and 4 sigma resolvable lines") {
    const auto catalog = zero_field_catalog();
    const auto pi_freqs = distinct_allowed_freqs(catalog, Polarization::pi);
    const auto sigma_freqs = distinct_allowed_freqs(catalog, Polarization::sigma);

    REQUIRE(pi_freqs.size() == 3);
    REQUIRE(sigma_freqs.size() == 4);

    // Frozen frequencies from the zero-field eigenvalue differences.
    CHECK(pi_freqs[0] == doctest::Approx(-3.7675).epsilon(1e-9));
    CHECK(pi_freqs[1] == doctest::Approx(-1.0725).epsilon(1e-9));
    CHECK(pi_freqs[2] == doctest::Approx(2.420).epsilon(1e-9));
    CHECK(sigma_freqs[0] == doctest::Approx(-1.695).epsilon(1e-9));
    CHECK(sigma_freqs[1] == doctest::Approx(-0.3275).epsilon(1e-9));
    CHECK(sigma_freqs[2] == doctest::Approx(0.3475).epsilon(1e-9));
    CHECK(sigma_freqs[3] == doctest::Approx(1.675).epsilon(1e-9));
}

TEST_CASE("zero-field allowed pairs match the hand-encoded diagram topology") {
    const auto catalog = zero_field_catalog({.merge = false});
    const std::set<std::pair<int, int>> pi_expected{{1, 3}, {2, 4}, {3, 1}, {4, 2}};
    const std::set<std::pair<int, int>> sigma_expected{{1, 1}, {1, 2}, {2, 1}, {2, 2},
                                                       {3, 3}, {3, 4}, {4, 3}, {4, 4}};

    double max_amp = 0.0;
    for (const auto& line : catalog) max_amp = std::max(max_amp, line.amplitude);

    for (const auto& line : catalog) {
        const auto& expected =
            line.pol == Polarization::pi ? pi_expected : sigma_expected;
        const bool should_be_allowed =
            expected.count({line.ground_index, line.excited_index}) > 0;
        if (should_be_allowed) {
            CHECK(!line.forbidden);
        } else {
            CHECK(line.amplitude < 1e-12 * max_amp);
        }
    }
}

TEST_CASE("pi transition between the lowest ground and excited levels is forbidden") {
    const auto catalog = zero_field_catalog({.merge = false});
    for (const auto& line : catalog) {
        if (line.pol == Polarization::pi && line.ground_index == 1 && line.excited_index == 1) {
            CHECK(line.amplitude < 1e-24);
        }
    }
}

TEST_CASE("merged lines carry the degeneracy bookkeeping") {
    auto catalog = zero_field_catalog();
    apply_line_labels(catalog, helpers::adjacency());

    std::map<std::string, const TransitionLine*> by_label;
    for (const auto& line : catalog) {
        if (!line.label.empty() && !line.forbidden) by_label[line.label] = &line;
    }
    REQUIRE(by_label.size() == 7);
    CHECK(by_label["I"]->gi == 2);
    CHECK(by_label["I"]->gj == 2);
    CHECK(by_label["I"]->amplitude == doctest::Approx(2.0)); // two coincident unit lines
    CHECK(by_label["C"]->gi == 2);
    CHECK(by_label["C"]->gj == 1);
    CHECK(by_label["G"]->gi == 1);
    CHECK(by_label["G"]->gj == 2);
    CHECK(by_label["A"]->gi == 1);
    CHECK(by_label["A"]->gj == 1);

    // Forbidden letters mark the two symmetry-dark level pairs.
    bool saw_b = false, saw_d = false;
    for (const auto& line : catalog) {
        if (line.label == "B") saw_b = true;
        if (line.label == "D") saw_d = true;
    }
    CHECK(saw_b);
    CHECK(saw_d);
}

TEST_CASE("catalog frequencies equal independently recomputed level differences") {
    const SpinSystem sys = helpers::system();
    const FieldVector b{0.12, -0.07, 0.31};
    const auto catalog = catalog_at(sys, b, helpers::moments(), {.merge = false});
    const LevelSet g = solve_levels(sys.ground, b, kConsts);
    const LevelSet e = solve_levels(sys.excited, b, kConsts);
    for (const auto& line : catalog) {
        const double expected = e.energies[static_cast<std::size_t>(line.excited_index - 1)] -
                                g.energies[static_cast<std::size_t>(line.ground_index - 1)];
        CHECK(std::abs(line.freq_ghz - expected) < 1e-10);
    }
}

TEST_CASE("an all-zero transition moment is rejected") {
    const SpinSystem sys = helpers::system();
    std::vector<TransitionMoment> moments{TransitionMoment{}}; // zero matrix
    CHECK_THROWS_AS(catalog_at(sys, FieldVector{}, moments), std::invalid_argument);
}

TEST_CASE("catalog rejects level sets from different fields") {
    const SpinSystem sys = helpers::system();
    const LevelSet g = sys.solve(Manifold::ground, FieldVector{});
    const LevelSet e = sys.solve(Manifold::excited, FieldVector::along_c(0.1));
    const auto moments = helpers::moments();
    CHECK_THROWS_AS(transition_catalog(g, e, moments), std::invalid_argument);
}

TEST_CASE("total pi amplitude is invariant under field rotation about c") {
    const SpinSystem sys = helpers::system();
    const auto moments = helpers::moments();
    const auto total_pi = [&](const FieldVector& b) {
        double sum = 0.0;
        for (const auto& line : catalog_at(sys, b, moments, {.merge = false})) {
            if (line.pol == Polarization::pi) sum += line.amplitude;
        }
        return sum;
    };
    const double base = total_pi({0.4, 0.0, 0.3});
    for (double phi : {0.3, 1.2, 2.9}) {
        const double rotated = total_pi({0.4 * std::cos(phi), 0.4 * std::sin(phi), 0.3});
        CHECK(std::abs(rotated / base - 1.0) < 1e-10);
    }
}

TEST_CASE("boltzmann populations") {
    const LevelSet ground = solve_levels(helpers::ground_params(), FieldVector{}, kConsts);

    SUBCASE("infinite-temperature limit is uniform") {
        const auto p = boltzmann_populations(ground, 1e9, kConsts);
        for (double pi : p) CHECK(std::abs(pi - 0.25) < 1e-9);
    }
    SUBCASE("cold limit concentrates in the degenerate pair") {
        const auto p = boltzmann_populations(ground, 0.01, kConsts);
        CHECK(std::abs(p[0] - 0.5) < 1e-4);
        CHECK(std::abs(p[1] - 0.5) < 1e-4);
        const auto p_colder = boltzmann_populations(ground, 0.001, kConsts);
        CHECK(p_colder[2] < 1e-10);
        CHECK(p_colder[3] < 1e-10);
    }
    SUBCASE("2 K values against the direct scalar formula") {
        const auto p = boltzmann_populations(ground, 2.0, kConsts);
        const double kt = kConsts.boltzmann_ghz_per_k * 2.0;
        double z = 0.0;
        std::array<double, 4> expect{};
        for (std::size_t i = 0; i < 4; ++i) {
            expect[i] = std::exp(-ground.energies[i] / kt);
            z += expect[i];
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(p[i] == doctest::Approx(expect[i] / z).epsilon(1e-12));
            sum += p[i];
        }
        CHECK(std::abs(sum - 1.0) < 1e-12);
        CHECK(std::abs(p[0] - 0.258) < 1e-3);
        CHECK(std::abs(p[1] - 0.258) < 1e-3);
        CHECK(std::abs(p[3] - 0.241) < 1e-3);
    }
    SUBCASE("nonpositive temperature is rejected") {
        CHECK_THROWS_AS(boltzmann_populations(ground, 0.0, kConsts), std::invalid_argument);
        CHECK_THROWS_AS(boltzmann_populations(ground, -1.0, kConsts), std::invalid_argument);
    }
}

TEST_CASE("synthesized single gaussian line has the textbook peak height") {
    const double fwhm = 0.275;
    LineshapeParams shape{LineshapeKind::gaussian, fwhm, {}};
    const std::vector<TransitionLine> catalog{single_line(0.0, 1.0)};
    const std::array<double, 4> populations{1.0, 0.0, 0.0, 0.0};
    const Spectrum s = synth_spectrum(catalog, populations, shape, 1.0,
                                      uniform_grid(-1.5, 1.5, 2001), Polarization::pi);

    const double peak = *std::max_element(s.alpha_per_cm.begin(), s.alpha_per_cm.end());
    CHECK(peak == doctest::Approx(0.93944 / fwhm).epsilon(1e-3));
    CHECK(trapezoid(s.detunings_ghz, s.alpha_per_cm) == doctest::Approx(1.0).epsilon(0.01));
    CHECK(std::all_of(s.alpha_per_cm.begin(), s.alpha_per_cm.end(),
                      [](double a) { return a >= 0.0; }));
}

TEST_CASE("lorentzian lineshape integrates to one as well") {
    LineshapeParams shape{LineshapeKind::lorentzian, 0.25, {}};
    const std::vector<TransitionLine> catalog{single_line(0.0, 1.0)};
    const Spectrum s = synth_spectrum(catalog, {1.0, 0.0, 0.0, 0.0}, shape, 1.0,
                                      uniform_grid(-60.0, 60.0, 200001), Polarization::pi);
    CHECK(trapezoid(s.detunings_ghz, s.alpha_per_cm) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("area calibration reproduces the observed peak scale") {
    auto catalog = zero_field_catalog();
    apply_line_labels(catalog, helpers::adjacency());
    const LevelSet ground = solve_levels(helpers::ground_params(), FieldVector{}, kConsts);
    const auto populations = boltzmann_populations(ground, 2.0, kConsts);

    const std::map<std::string, double> areas{{"A", 97.3}, {"C", 16.4}, {"E", 102.7},
                                              {"F", 17.4}, {"G", 20.2}, {"H", 19.9},
                                              {"I", 189.7}};
    catalog = calibrate_line_areas(catalog, areas, populations);
    LineshapeParams shape{LineshapeKind::gaussian, 0.275, {}};
    const Spectrum s = synth_spectrum(catalog, populations, shape, 1.0,
                                      uniform_grid(-6.0, 6.0, 4001), Polarization::pi);
    const double peak = *std::max_element(s.alpha_per_cm.begin(), s.alpha_per_cm.end());
    CHECK(peak > 450.0 / 2.0);
    CHECK(peak < 450.0 * 2.0);
}

TEST_CASE("per-line fwhm overrides widen only the labeled line") {
    TransitionLine narrow = single_line(-1.0, 1.0);
    TransitionLine wide = single_line(1.0, 1.0);
    wide.label = "W";
    LineshapeParams shape{LineshapeKind::gaussian, 0.1, {{"W", 0.4}}};
    const Spectrum s = synth_spectrum(std::vector<TransitionLine>{narrow, wide},
                                      {1.0, 0.0, 0.0, 0.0}, shape, 1.0,
                                      uniform_grid(-3.0, 3.0, 4001), Polarization::pi);
    const auto peaks = peak_find(s, 0.1);
    REQUIRE(peaks.size() == 2);
    CHECK(peaks[0].fwhm_estimate_ghz == doctest::Approx(0.1).epsilon(0.05));
    CHECK(peaks[1].fwhm_estimate_ghz == doctest::Approx(0.4).epsilon(0.05));
}

TEST_CASE("zero-amplitude catalog synthesizes an identically zero spectrum") {
    std::vector<TransitionLine> catalog{single_line(0.0, 0.0)};
    const Spectrum s = synth_spectrum(catalog, {1.0, 0.0, 0.0, 0.0},
                                      LineshapeParams{LineshapeKind::gaussian, 0.275, {}}, 1.0,
                                      uniform_grid(-2.0, 2.0, 501), Polarization::pi);
    for (double a : s.alpha_per_cm) CHECK(a == 0.0);
}

TEST_CASE("coarse or non-covering grids are rejected") {
    const std::vector<TransitionLine> catalog{single_line(0.0, 1.0)};
    const LineshapeParams shape{LineshapeKind::gaussian, 0.275, {}};
    CHECK_THROWS_AS(synth_spectrum(catalog, {1.0, 0.0, 0.0, 0.0}, shape, 1.0,
                                   uniform_grid(-2.0, 2.0, 30), Polarization::pi),
                    std::invalid_argument);
    CHECK_THROWS_AS(synth_spectrum(catalog, {1.0, 0.0, 0.0, 0.0}, shape, 1.0,
                                   uniform_grid(-0.5, 0.5, 2001), Polarization::pi),
                    std::invalid_argument);
}

TEST_CASE("spectrum synthesis is linear in the catalog") {
    auto catalog = zero_field_catalog();
    const LevelSet ground = solve_levels(helpers::ground_params(), FieldVector{}, kConsts);
    const auto populations = boltzmann_populations(ground, 2.0, kConsts);
    const LineshapeParams shape{LineshapeKind::gaussian, 0.275, {}};
    const auto grid = uniform_grid(-6.0, 6.0, 2001);

    std::vector<TransitionLine> first(catalog.begin(), catalog.begin() + catalog.size() / 2);
    std::vector<TransitionLine> second(catalog.begin() + catalog.size() / 2, catalog.end());

    const Spectrum whole = synth_spectrum(catalog, populations, shape, 2.5, grid, Polarization::sigma);
    const Spectrum a = synth_spectrum(first, populations, shape, 2.5, grid, Polarization::sigma);
    const Spectrum b = synth_spectrum(second, populations, shape, 2.5, grid, Polarization::sigma);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double sum = a.alpha_per_cm[i] + b.alpha_per_cm[i];
        if (whole.alpha_per_cm[i] > 0.0) {
            CHECK(std::abs(sum / whole.alpha_per_cm[i] - 1.0) < 1e-12);
        } else {
            CHECK(sum == 0.0);
        }
    }
}

TEST_CASE("field ramp rows are consistent and continuous") {
    const SpinSystem sys = helpers::system();
    const auto moments = helpers::moments();
    const LineshapeParams shape{LineshapeKind::gaussian, 0.275, {}};
    const Eigen::Vector3d perp(1.0, 0.0, 0.0);
    std::vector<double> fields;
    for (int i = 0; i <= 60; ++i) fields.push_back(6.0 * i / 60.0);
    const auto grid = uniform_grid(-30.0, 30.0, 2401);

    const RampMap map = field_ramp_map(sys, perp, fields, moments, shape, 2.0, grid,
                                       Polarization::sigma);
    REQUIRE(map.alpha_per_cm.size() == fields.size());

    SUBCASE("first row equals the standalone zero-field spectrum bitwise") {
        const LevelSet ground = sys.solve(Manifold::ground, FieldVector{});
        const auto populations = boltzmann_populations(ground, 2.0, sys.consts);
        const Spectrum direct = synth_spectrum(catalog_at(sys, FieldVector{}, moments),
                                               populations, shape, 1.0, grid, Polarization::sigma);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(map.alpha_per_cm[0][i] == direct.alpha_per_cm[i]);
        }
    }

    SUBCASE("the highest sigma line drifts monotonically outward with field") {
        const auto catalogs = ramp_catalogs(sys, perp, fields, moments, Polarization::sigma);
        double prev = -1e300;
        for (std::size_t r = 0; r < catalogs.size(); ++r) {
            double top = -1e300;
            for (const auto& line : catalogs[r]) top = std::max(top, line.freq_ghz);
            if (r > 0) CHECK(top >= prev - 1e-9);
            if (fields[r] >= 0.5 && r > 0) CHECK(top > prev);
            prev = top;
        }
    }

    SUBCASE("line positions drift continuously between adjacent rows") {
        const auto catalogs = ramp_catalogs(sys, perp, fields, moments, Polarization::sigma);
        const double b_step = fields[1] - fields[0];
        // Eigenvalue slopes are bounded by the Zeeman rates, giving a hard
        // ceiling on how far any line can move per field step.
        const double slope_bound =
            (std::abs(sys.ground.g.perpendicular) + std::abs(sys.excited.g.perpendicular) + 1.0) *
            sys.consts.bohr_magneton_ghz_per_t;
        for (std::size_t r = 1; r < catalogs.size(); ++r) {
            for (const auto& line : catalogs[r]) {
                double nearest = 1e300;
                for (const auto& prev : catalogs[r - 1]) {
                    nearest = std::min(nearest, std::abs(prev.freq_ghz - line.freq_ghz));
                }
                CHECK(nearest < slope_bound * b_step);
            }
        }
    }
}

TEST_CASE("ramp line positions match brute-force recomputation at random fields") {
    const SpinSystem sys = helpers::system();
    const auto moments = helpers::moments();
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 6.0);
    const Eigen::Vector3d perp(1.0, 0.0, 0.0);

    std::vector<double> fields;
    for (int i = 0; i < 10; ++i) fields.push_back(u(rng));
    const auto catalogs = ramp_catalogs(sys, perp, fields, moments, Polarization::sigma);

    for (std::size_t r = 0; r < fields.size(); ++r) {
        const FieldVector b{fields[r], 0.0, 0.0};
        const LevelSet g = solve_levels(sys.ground, b, sys.consts);
        const LevelSet e = solve_levels(sys.excited, b, sys.consts);
        for (const auto& line : catalogs[r]) {
            double best = 1e300;
            for (std::size_t i = 0; i < 4; ++i) {
                for (std::size_t j = 0; j < 4; ++j) {
                    best = std::min(best, std::abs((e.energies[j] - g.energies[i]) - line.freq_ghz));
                }
            }
            CHECK(best < 1e-8);
        }
    }
}

TEST_CASE("peak_find") {
    const LineshapeParams shape{LineshapeKind::gaussian, 0.1, {}};
    SUBCASE("single line center is found to a tenth of the grid step") {
        const std::vector<TransitionLine> catalog{single_line(1.0, 1.0)};
        const auto grid = uniform_grid(0.0, 2.0, 401); // 5 MHz step
        const Spectrum s = synth_spectrum(catalog, {1.0, 0.0, 0.0, 0.0}, shape, 1.0, grid,
                                          Polarization::pi);
        const auto peaks = peak_find(s, 0.1);
        REQUIRE(peaks.size() == 1);
        CHECK(std::abs(peaks[0].center_ghz - 1.0) < 0.005 / 10.0);
        CHECK(peaks[0].fwhm_estimate_ghz == doctest::Approx(0.1).epsilon(0.05));
    }
    SUBCASE("two lines five widths apart are both found") {
        const std::vector<TransitionLine> catalog{single_line(-0.25, 1.0), single_line(0.25, 0.7)};
        const Spectrum s = synth_spectrum(catalog, {1.0, 0.0, 0.0, 0.0}, shape, 1.0,
                                          uniform_grid(-1.0, 1.0, 801), Polarization::pi);
        const auto peaks = peak_find(s, 0.1);
        REQUIRE(peaks.size() == 2);
        CHECK(peaks[0].center_ghz == doctest::Approx(-0.25).epsilon(1e-3));
        CHECK(peaks[1].center_ghz == doctest::Approx(0.25).epsilon(1e-3));
    }
    SUBCASE("flat spectrum yields nothing") {
        Spectrum s;
        s.detunings_ghz = uniform_grid(0.0, 1.0, 101);
        s.alpha_per_cm.assign(101, 3.0);
        CHECK(peak_find(s, 1e-6).empty());
    }
    SUBCASE("empty spectrum is rejected") {
        CHECK_THROWS_AS(peak_find(Spectrum{}, 0.1), std::invalid_argument);
    }
}
