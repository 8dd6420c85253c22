#include "ybspin/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace ybspin {

namespace {

Matrix4c lift_to_product_space(const Eigen::Matrix2cd& m) {
    Matrix4c out = Matrix4c::Zero();
    for (int se = 0; se < 2; ++se)
        for (int sg = 0; sg < 2; ++sg) {
            out(2 * se, 2 * sg) = m(se, sg);
            out(2 * se + 1, 2 * sg + 1) = m(se, sg);
        }
    return out;
}

void merge_coincident(std::vector<TransitionLine>& lines, double tol) {
    std::stable_sort(lines.begin(), lines.end(),
                     [](const TransitionLine& a, const TransitionLine& b) {
                         return a.freq_ghz < b.freq_ghz;
                     });
    std::vector<TransitionLine> merged;
    for (auto& line : lines) {
        if (!merged.empty() && line.freq_ghz - merged.back().freq_ghz <= tol) {
            TransitionLine& into = merged.back();
            into.amplitude += line.amplitude;
            into.pairs.insert(into.pairs.end(), line.pairs.begin(), line.pairs.end());
            continue;
        }
        merged.push_back(std::move(line));
    }
    for (auto& line : merged) {
        std::sort(line.pairs.begin(), line.pairs.end());
        std::set<int> gset, eset;
        for (auto& [gidx, eidx] : line.pairs) {
            gset.insert(gidx);
            eset.insert(eidx);
        }
        line.gi = static_cast<int>(gset.size());
        line.gj = static_cast<int>(eset.size());
        line.ground_index = line.pairs.front().first;
        line.excited_index = line.pairs.front().second;
    }
    lines = std::move(merged);
}

} // namespace

const char* to_string(Polarization pol) { return pol == Polarization::pi ? "pi" : "sigma"; }

Polarization polarization_from_string(const std::string& s) {
    if (s == "pi") return Polarization::pi;
    if (s == "sigma") return Polarization::sigma;
    throw std::invalid_argument("unknown polarization '" + s + "' (expected pi or sigma)");
}

std::vector<TransitionMoment> default_moments(double pi_amplitude, double sigma_amplitude) {
    TransitionMoment pi_m, sigma_m;
    pi_m.pol = Polarization::pi;
    pi_m.m << pi_amplitude, 0.0, 0.0, pi_amplitude;
    sigma_m.pol = Polarization::sigma;
    sigma_m.m << 0.0, sigma_amplitude, sigma_amplitude, 0.0;
    return {pi_m, sigma_m};
}

std::vector<TransitionLine> transition_catalog(const LevelSet& ground, const LevelSet& excited,
                                               std::span<const TransitionMoment> moments,
                                               double optical_offset_diff_ghz,
                                               const CatalogOptions& opts) {
    if (!same_field(ground.field, excited.field)) {
        throw std::invalid_argument("transition_catalog: LevelSets were solved at different fields");
    }

    std::vector<TransitionLine> raw;
    raw.reserve(16 * moments.size());
    double max_amp = 0.0;
    for (const auto& moment : moments) {
        if (moment.m.cwiseAbs().maxCoeff() == 0.0) {
            throw std::invalid_argument("transition_catalog: transition moment for " +
                                        std::string(to_string(moment.pol)) +
                                        " polarization has no nonzero element");
        }
        const Matrix4c op = lift_to_product_space(moment.m);
        for (int gidx = 0; gidx < 4; ++gidx) {
            for (int eidx = 0; eidx < 4; ++eidx) {
                TransitionLine line;
                line.pol = moment.pol;
                line.freq_ghz = excited.energies[static_cast<std::size_t>(eidx)] -
                                ground.energies[static_cast<std::size_t>(gidx)] +
                                optical_offset_diff_ghz;
                const std::complex<double> me =
                    excited.states[static_cast<std::size_t>(eidx)].dot(
                        op * ground.states[static_cast<std::size_t>(gidx)]);
                line.amplitude = std::norm(me);
                line.ground_index = gidx + 1;
                line.excited_index = eidx + 1;
                line.pairs = {{gidx + 1, eidx + 1}};
                max_amp = std::max(max_amp, line.amplitude);
                raw.push_back(std::move(line));
            }
        }
    }
    for (auto& line : raw) line.forbidden = line.amplitude < opts.forbidden_rel * max_amp;

    if (!opts.merge) return raw;

    std::vector<TransitionLine> out;
    for (Polarization pol : {Polarization::pi, Polarization::sigma}) {
        std::vector<TransitionLine> allowed;
        for (auto& line : raw) {
            if (line.pol != pol) continue;
            if (line.forbidden) {
                out.push_back(line);
            } else {
                allowed.push_back(line);
            }
        }
        merge_coincident(allowed, opts.merge_tol_ghz);
        out.insert(out.end(), allowed.begin(), allowed.end());
    }
    std::stable_sort(out.begin(), out.end(), [](const TransitionLine& a, const TransitionLine& b) {
        if (a.pol != b.pol) return a.pol < b.pol;
        return a.freq_ghz < b.freq_ghz;
    });
    return out;
}

std::vector<TransitionLine> catalog_at(const SpinSystem& system, const FieldVector& b,
                                       std::span<const TransitionMoment> moments,
                                       const CatalogOptions& opts) {
    const LevelSet g = system.solve(Manifold::ground, b);
    const LevelSet e = system.solve(Manifold::excited, b);
    const double offset_diff = system.excited.optical_offset_ghz - system.ground.optical_offset_ghz;
    return transition_catalog(g, e, moments, offset_diff, opts);
}

void apply_line_labels(std::vector<TransitionLine>& catalog,
                       std::span<const AdjacencyEntry> adjacency) {
    for (auto& line : catalog) {
        line.label.clear();
        for (const auto& entry : adjacency) {
            if (!entry.forbidden && entry.pol != line.pol) continue;
            if (entry.forbidden != line.forbidden) continue;
            const bool covered = std::all_of(
                line.pairs.begin(), line.pairs.end(), [&entry](const std::pair<int, int>& pr) {
                    return std::find(entry.pairs.begin(), entry.pairs.end(), pr) !=
                           entry.pairs.end();
                });
            if (covered) {
                line.label = entry.letter;
                break;
            }
        }
    }
}

std::array<double, 4> boltzmann_populations(const LevelSet& levels, double temperature_k,
                                            const PhysicalConstants& consts) {
    if (!(temperature_k > 0.0)) {
        throw std::invalid_argument("boltzmann_populations: temperature must be positive");
    }
    const double kt_ghz = consts.boltzmann_ghz_per_k * temperature_k;
    const double e_min = *std::min_element(levels.energies.begin(), levels.energies.end());
    std::array<double, 4> p{};
    double z = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        p[i] = std::exp(-(levels.energies[i] - e_min) / kt_ghz);
        z += p[i];
    }
    for (auto& pi : p) pi /= z;
    return p;
}

void LineshapeParams::validate() const {
    if (!(fwhm_ghz > 0.0)) throw std::invalid_argument("LineshapeParams: fwhm must be positive");
    for (const auto& [label, w] : per_line_fwhm_ghz) {
        if (!(w > 0.0)) {
            throw std::invalid_argument("LineshapeParams: per-line fwhm for '" + label +
                                        "' must be positive");
        }
    }
}

double LineshapeParams::fwhm_for(const std::string& label) const {
    if (!label.empty()) {
        if (auto it = per_line_fwhm_ghz.find(label); it != per_line_fwhm_ghz.end()) {
            return it->second;
        }
    }
    return fwhm_ghz;
}

double lineshape_value(LineshapeKind kind, double fwhm, double x) {
    if (kind == LineshapeKind::gaussian) {
        const double ln2 = std::numbers::ln2;
        const double norm = 2.0 / fwhm * std::sqrt(ln2 / std::numbers::pi);
        const double u = x / fwhm;
        return norm * std::exp(-4.0 * ln2 * u * u);
    }
    const double hw = fwhm / 2.0;
    return hw / std::numbers::pi / (x * x + hw * hw);
}

std::vector<double> uniform_grid(double start, double stop, int n) {
    if (n < 2 || !(stop > start)) throw std::invalid_argument("uniform_grid: need stop > start and n >= 2");
    std::vector<double> g(static_cast<std::size_t>(n));
    const double step = (stop - start) / (n - 1);
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = start + step * i;
    return g;
}

Spectrum synth_spectrum(std::span<const TransitionLine> catalog,
                        const std::array<double, 4>& populations, const LineshapeParams& shape,
                        double scale, std::vector<double> grid, Polarization pol,
                        bool require_coverage) {
    shape.validate();
    if (grid.size() < 2) throw std::invalid_argument("synth_spectrum: grid needs at least 2 points");
    double max_step = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double d = grid[i] - grid[i - 1];
        if (!(d > 0.0)) throw std::invalid_argument("synth_spectrum: grid must be strictly increasing");
        max_step = std::max(max_step, d);
    }

    for (const auto& line : catalog) {
        if (line.pol != pol || line.forbidden) continue;
        const double w = shape.fwhm_for(line.label);
        if (max_step > w / 8.0) {
            throw std::invalid_argument("synth_spectrum: grid too coarse (need >= 8 samples per FWHM)");
        }
        if (require_coverage &&
            (grid.front() > line.freq_ghz - 3.0 * w || grid.back() < line.freq_ghz + 3.0 * w)) {
            throw std::invalid_argument("synth_spectrum: grid does not cover line at " +
                                        std::to_string(line.freq_ghz) + " GHz +-3 FWHM");
        }
    }

    Spectrum s;
    s.pol = pol;
    s.shape = shape;
    s.alpha_per_cm.assign(grid.size(), 0.0);
    for (const auto& line : catalog) {
        if (line.pol != pol || line.forbidden) continue;
        const double w = shape.fwhm_for(line.label);
        const double weight =
            scale * line.amplitude * populations[static_cast<std::size_t>(line.ground_index - 1)];
        if (weight == 0.0) continue;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            s.alpha_per_cm[i] += weight * lineshape_value(shape.kind, w, grid[i] - line.freq_ghz);
        }
    }
    s.detunings_ghz = std::move(grid);
    return s;
}

std::vector<TransitionLine> calibrate_line_areas(std::vector<TransitionLine> catalog,
                                                 const std::map<std::string, double>& area_by_label,
                                                 const std::array<double, 4>& populations) {
    for (auto& line : catalog) {
        auto it = line.label.empty() ? area_by_label.end() : area_by_label.find(line.label);
        if (it == area_by_label.end()) {
            line.amplitude = 0.0;
            continue;
        }
        const double p = populations[static_cast<std::size_t>(line.ground_index - 1)];
        if (!(p > 0.0)) throw std::invalid_argument("calibrate_line_areas: zero population for line " + line.label);
        line.amplitude = it->second / p;
    }
    return catalog;
}

RampMap field_ramp_map(const SpinSystem& system, const Eigen::Vector3d& orientation,
                       std::span<const double> b_values_t,
                       std::span<const TransitionMoment> moments, const LineshapeParams& shape,
                       double temperature_k, std::vector<double> grid, Polarization pol,
                       double scale) {
    if (b_values_t.empty()) throw std::invalid_argument("field_ramp_map: empty field range");
    const Eigen::Vector3d dir = orientation.normalized();

    RampMap map;
    map.pol = pol;
    map.detunings_ghz = grid;
    map.fields_t.assign(b_values_t.begin(), b_values_t.end());
    map.alpha_per_cm.reserve(b_values_t.size());
    for (double b : b_values_t) {
        const FieldVector field{b * dir.x(), b * dir.y(), b * dir.z()};
        const LevelSet g = system.solve(Manifold::ground, field);
        auto catalog = catalog_at(system, field, moments);
        const auto populations = boltzmann_populations(g, temperature_k, system.consts);
        Spectrum row = synth_spectrum(catalog, populations, shape, scale, grid, pol,
                                      /*require_coverage=*/false);
        map.alpha_per_cm.push_back(std::move(row.alpha_per_cm));
    }
    return map;
}

std::vector<std::vector<TransitionLine>> ramp_catalogs(const SpinSystem& system,
                                                       const Eigen::Vector3d& orientation,
                                                       std::span<const double> b_values_t,
                                                       std::span<const TransitionMoment> moments,
                                                       Polarization pol) {
    const Eigen::Vector3d dir = orientation.normalized();
    std::vector<std::vector<TransitionLine>> out;
    out.reserve(b_values_t.size());
    for (double b : b_values_t) {
        const FieldVector field{b * dir.x(), b * dir.y(), b * dir.z()};
        std::vector<TransitionLine> kept;
        for (auto& line : catalog_at(system, field, moments)) {
            if (!line.forbidden && line.pol == pol) kept.push_back(std::move(line));
        }
        out.push_back(std::move(kept));
    }
    return out;
}

std::vector<Peak> peak_find(const Spectrum& s, double min_prominence) {
    const auto& x = s.detunings_ghz;
    const auto& y = s.alpha_per_cm;
    if (x.empty() || y.size() != x.size()) {
        throw std::invalid_argument("peak_find: empty or inconsistent spectrum");
    }
    if (x.size() < 3) return {};
    const double step = x[1] - x[0];
    for (std::size_t i = 1; i < x.size(); ++i) {
        if (std::abs((x[i] - x[i - 1]) - step) > 1e-6 * std::abs(step)) {
            throw std::invalid_argument("peak_find: spectrum must be uniformly sampled");
        }
    }

    std::vector<Peak> peaks;
    for (std::size_t i = 1; i + 1 < y.size(); ++i) {
        if (!(y[i] > y[i - 1]) || !(y[i] >= y[i + 1])) continue;

        // Prominence: drop to the lowest saddle separating this peak from
        // higher ground on either side.
        double left_min = y[i];
        for (std::size_t j = i; j-- > 0;) {
            left_min = std::min(left_min, y[j]);
            if (y[j] > y[i]) break;
        }
        double right_min = y[i];
        for (std::size_t j = i + 1; j < y.size(); ++j) {
            right_min = std::min(right_min, y[j]);
            if (y[j] > y[i]) break;
        }
        const double prominence = y[i] - std::max(left_min, right_min);
        if (prominence < min_prominence) continue;

        Peak p;
        p.prominence = prominence;
        const double denom = y[i - 1] - 2.0 * y[i] + y[i + 1];
        const double delta = denom != 0.0 ? 0.5 * (y[i - 1] - y[i + 1]) / denom : 0.0;
        p.center_ghz = x[i] + delta * step;
        p.height = y[i] - 0.25 * (y[i - 1] - y[i + 1]) * delta;

        const double half = p.height / 2.0;
        double left = x.front(), right = x.back();
        for (std::size_t j = i; j-- > 0;) {
            if (y[j] <= half) {
                left = x[j] + step * (half - y[j]) / (y[j + 1] - y[j]);
                break;
            }
        }
        for (std::size_t j = i + 1; j < y.size(); ++j) {
            if (y[j] <= half) {
                right = x[j] - step * (half - y[j]) / (y[j - 1] - y[j]);
                break;
            }
        }
        p.fwhm_estimate_ghz = right - left;
        peaks.push_back(p);
    }
    return peaks;
}

} // namespace ybspin
