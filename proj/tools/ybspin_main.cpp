// Command-line front end: reproducible runs of the level, spectrum, fitting,
// and ZEFOZ machinery from a single strict config file.

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ybspin/config.hpp"
#include "ybspin/csv.hpp"
#include "ybspin/fit.hpp"
#include "ybspin/photophysics.hpp"
#include "ybspin/spectra.hpp"
#include "ybspin/spin_system.hpp"
#include "ybspin/zefoz.hpp"

using namespace ybspin;

namespace {

FieldVector parse_field(const std::string& text) {
    FieldVector b;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> b.bx >> c1 >> b.by >> c2 >> b.bz) || c1 != ',' || c2 != ',') {
        throw std::runtime_error("--field expects \"bx,by,bz\" in Tesla, got '" + text + "'");
    }
    return b;
}

std::vector<double> parse_range(const std::string& text, const char* flag) {
    double start = 0.0, stop = 0.0;
    long steps = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> start >> c1 >> stop >> c2 >> steps) || c1 != ':' || c2 != ':' || steps < 1) {
        throw std::runtime_error(std::string(flag) +
                                 " expects \"start:stop:steps\", got '" + text + "'");
    }
    if (steps == 1) return {start};
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(steps));
    for (long i = 0; i < steps; ++i) {
        out.push_back(start + (stop - start) * static_cast<double>(i) / static_cast<double>(steps - 1));
    }
    return out;
}

Eigen::Vector3d parse_orientation(const std::string& text) {
    const FieldVector v = parse_field(text);
    Eigen::Vector3d dir(v.bx, v.by, v.bz);
    if (dir.norm() == 0.0) throw std::runtime_error("--orientation must be a nonzero vector");
    return dir.normalized();
}

TransitionSpec parse_transition(const std::string& text) {
    // Two tokens like g3-g4 / e1-e2 / g1-e1.
    const auto token = [&](const std::string& t) -> std::pair<Manifold, int> {
        if (t.size() != 2 || (t[0] != 'g' && t[0] != 'e') || t[1] < '1' || t[1] > '4') {
            throw std::runtime_error("--transition tokens look like g3, e1; got '" + t + "'");
        }
        return {t[0] == 'g' ? Manifold::ground : Manifold::excited, t[1] - '0'};
    };
    const auto dash = text.find('-');
    if (dash == std::string::npos) {
        throw std::runtime_error("--transition expects \"g3-g4\" style, got '" + text + "'");
    }
    const auto [ma, la] = token(text.substr(0, dash));
    const auto [mb, lb] = token(text.substr(dash + 1));
    TransitionSpec spec{ma, la, mb, lb};
    spec.validate();
    return spec;
}

Polarization parse_pol(const std::string& text) { return polarization_from_string(text); }

void write_fit_outputs(const FitResult& fit, const std::string& out_path) {
    // Flat key-value block on stdout.
    for (std::size_t i = 0; i < fit.names.size(); ++i) {
        std::cout << fit.names[i] << " = " << format_float(fit.values(static_cast<Eigen::Index>(i)))
                  << " +- " << format_float(fit.uncertainty(fit.names[i])) << "\n";
    }
    std::cout << "residual_norm = " << format_float(fit.residual_norm) << "\n"
              << "iterations = " << fit.iterations << "\n"
              << "converged = " << (fit.converged ? "yes" : "no") << "\n";
    for (const auto& flag : fit.flags) std::cout << "flag: " << flag << "\n";
    if (!fit.message.empty()) std::cout << "note: " << fit.message << "\n";

    if (out_path.empty()) return;
    CsvTable table;
    for (const auto& name : fit.names) {
        table.columns.push_back(name);
        table.columns.push_back(name + "_unc");
    }
    table.columns.insert(table.columns.end(), {"residual_norm", "iterations", "converged", "flags"});
    std::vector<std::string> row;
    for (std::size_t i = 0; i < fit.names.size(); ++i) {
        row.push_back(format_float(fit.values(static_cast<Eigen::Index>(i))));
        row.push_back(format_float(fit.uncertainty(fit.names[i])));
    }
    row.push_back(format_float(fit.residual_norm));
    row.push_back(std::to_string(fit.iterations));
    row.push_back(fit.converged ? "1" : "0");
    std::string joined;
    for (const auto& flag : fit.flags) joined += (joined.empty() ? "" : ";") + flag;
    row.push_back(joined);
    table.add_row(std::move(row));
    table.write(out_path);
}

int exit_for(const FitResult& fit) {
    if (!fit.converged) {
        std::cerr << "error: fit did not converge: " << fit.message << "\n";
        return 1;
    }
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_levels(const RunConfig& cfg, const FieldVector& field, const std::string& manifold,
               const std::string& out_path) {
    const Manifold m = manifold == "ground" ? Manifold::ground : Manifold::excited;
    const SpinSystem sys = cfg.system();
    const LevelSet levels = sys.solve(m, field);

    CsvTable table;
    table.columns = {"index", "label", "energy_ghz",
                     "c_uU_re", "c_uU_im", "c_uD_re", "c_uD_im",
                     "c_dU_re", "c_dU_im", "c_dD_re", "c_dD_im"};
    for (std::size_t i = 0; i < 4; ++i) {
        std::vector<std::string> row{std::to_string(i + 1), levels.labels[i],
                                     format_float(levels.energies[i])};
        for (int j = 0; j < 4; ++j) {
            row.push_back(format_float(levels.states[i](j).real()));
            row.push_back(format_float(levels.states[i](j).imag()));
        }
        table.add_row(std::move(row));
        std::cout << levels.labels[i] << "  " << format_float(levels.energies[i]) << " GHz\n";
    }
    if (!out_path.empty()) table.write(out_path);
    return 0;
}

int cmd_spectrum(const RunConfig& cfg, const FieldVector& field, Polarization pol,
                 const std::string& range, double scale, const std::string& out_path) {
    const SpinSystem sys = cfg.system();
    auto catalog = catalog_at(sys, field, cfg.moments());
    apply_line_labels(catalog, cfg.adjacency);
    const auto populations =
        boltzmann_populations(sys.solve(Manifold::ground, field), cfg.temperature_k, cfg.constants);
    const Spectrum s = synth_spectrum(catalog, populations, cfg.lineshape, scale,
                                      parse_range(range, "--range"), pol);

    CsvTable table;
    table.columns = {"detuning_ghz", "alpha_per_cm"};
    for (std::size_t i = 0; i < s.detunings_ghz.size(); ++i) {
        table.add_row({format_float(s.detunings_ghz[i]), format_float(s.alpha_per_cm[i])});
    }
    if (!out_path.empty()) table.write(out_path);
    std::cout << "spectrum: " << s.detunings_ghz.size() << " samples, "
              << to_string(pol) << " polarization\n";
    return 0;
}

int cmd_ramp(const RunConfig& cfg, const std::string& orientation, const std::string& b_range,
             const std::string& grid_range, Polarization pol, const std::string& out_path) {
    const SpinSystem sys = cfg.system();
    const auto fields = parse_range(b_range, "--range");
    const auto grid = parse_range(grid_range, "--grid");
    const RampMap map = field_ramp_map(sys, parse_orientation(orientation), fields, cfg.moments(),
                                       cfg.lineshape, cfg.temperature_k, grid, pol);

    CsvTable table;
    table.columns = {"b_t"};
    for (double d : map.detunings_ghz) table.columns.push_back(format_float(d));
    for (std::size_t r = 0; r < map.fields_t.size(); ++r) {
        std::vector<std::string> row{format_float(map.fields_t[r])};
        for (double a : map.alpha_per_cm[r]) row.push_back(format_float(a));
        table.add_row(std::move(row));
    }
    if (!out_path.empty()) table.write(out_path);
    std::cout << "ramp: " << map.fields_t.size() << " field rows x " << map.detunings_ghz.size()
              << " detunings\n";
    return 0;
}

int cmd_fit_ham(const RunConfig& cfg, const std::string& obs_path, const std::string& out_path) {
    const CsvTable table = read_csv(obs_path);
    const int bx = table.require_column("bx_t", obs_path);
    const int by = table.require_column("by_t", obs_path);
    const int bz = table.require_column("bz_t", obs_path);
    const int pol = table.require_column("pol", obs_path);
    const int freq = table.require_column("freq_ghz", obs_path);
    const int unc = table.require_column("uncertainty_ghz", obs_path);
    const int gidx = table.column_index("ground_index");
    const int eidx = table.column_index("excited_index");

    std::vector<PeakObservation> observations;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        PeakObservation obs;
        obs.field = {table.number(r, bx), table.number(r, by), table.number(r, bz)};
        obs.pol = parse_pol(table.rows[r][static_cast<std::size_t>(pol)]);
        obs.freq_ghz = table.number(r, freq);
        obs.uncertainty_ghz = table.number(r, unc);
        if (gidx >= 0 && eidx >= 0) {
            obs.ground_index = static_cast<int>(table.number(r, gidx));
            obs.excited_index = static_cast<int>(table.number(r, eidx));
        }
        observations.push_back(obs);
    }

    const FitResult fit = fit_spin_hamiltonian(observations, cfg.ground, cfg.excited,
                                               cfg.constants, cfg.moments(), cfg.nuclear_zeeman);
    write_fit_outputs(fit, out_path);
    return exit_for(fit);
}

int cmd_fit_decay(const std::string& trace_path, const std::string& model, const std::string& mode,
                  std::optional<double> fix_x, const std::string& out_path) {
    const CsvTable table = read_csv(trace_path);
    FitResult fit;
    if (model == "lorentzian") {
        const int xcol = table.require_column("x", trace_path);
        const int vcol = table.require_column("value", trace_path);
        std::vector<double> xs, ys;
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            xs.push_back(table.number(r, xcol));
            ys.push_back(table.number(r, vcol));
        }
        fit = fit_lorentzian(xs, ys);
    } else {
        const int tcol = table.require_column("time_s", trace_path);
        const int vcol = table.require_column("value", trace_path);
        const int scol = table.column_index("sigma");
        DecayTrace trace;
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            trace.times_s.push_back(table.number(r, tcol));
            trace.values.push_back(table.number(r, vcol));
            if (scol >= 0) trace.sigma.push_back(table.number(r, scol));
        }
        if (model == "exp") {
            fit = fit_exponential(trace);
        } else {
            const EchoMode echo = mode == "intensity" ? EchoMode::intensity : EchoMode::field;
            fit = fit_mims(trace, echo, fix_x);
        }
    }
    write_fit_outputs(fit, out_path);
    return exit_for(fit);
}

int cmd_table1(const RunConfig& cfg, const std::string& absorption_path,
               std::optional<double> tau_f_s, const std::string& out_path) {
    const CsvTable input = read_csv(absorption_path);
    const int lcol = input.require_column("label", absorption_path);
    const int pcol = input.require_column("pol", absorption_path);
    const int acol = input.require_column("integrated_alpha_ghz_per_cm", absorption_path);
    if (input.rows.empty()) throw std::runtime_error(absorption_path + ": no absorption rows");

    const SpinSystem sys = cfg.system();
    const auto populations = boltzmann_populations(sys.solve(Manifold::ground, FieldVector{}),
                                                   cfg.temperature_k, cfg.constants);

    std::vector<RateRecord> records;
    CsvTable table;
    table.columns = {"label", "pol", "integrated_alpha_ghz_per_cm", "f", "rate_hz"};
    for (std::size_t r = 0; r < input.rows.size(); ++r) {
        const std::string label = input.rows[r][static_cast<std::size_t>(lcol)];
        const AdjacencyEntry& entry = cfg.adjacency_for(label);
        if (entry.forbidden) {
            throw std::runtime_error("line '" + label + "' is symmetry-forbidden; it has no "
                                     "oscillator strength to tabulate");
        }
        const Polarization pol = parse_pol(input.rows[r][static_cast<std::size_t>(pcol)]);
        if (pol != entry.pol) {
            throw std::runtime_error("line '" + label + "' polarization disagrees with the adjacency table");
        }

        AbsorptionRecord rec;
        rec.label = label;
        rec.pol = pol;
        rec.integrated_alpha_ghz_per_cm = input.number(r, acol);
        std::vector<int> ground_levels, excited_levels;
        for (const auto& [g, e] : entry.pairs) {
            if (std::find(ground_levels.begin(), ground_levels.end(), g) == ground_levels.end())
                ground_levels.push_back(g);
            if (std::find(excited_levels.begin(), excited_levels.end(), e) == excited_levels.end())
                excited_levels.push_back(e);
        }
        rec.originating_level = ground_levels.front();
        rec.originating_degeneracy = static_cast<int>(ground_levels.size());
        rec.excited_degeneracy = static_cast<int>(excited_levels.size());
        rec.excited_levels = excited_levels;

        const RateRecord rr = absorption_to_rate(rec, cfg.number_density_per_cm3, populations,
                                                 cfg.medium);
        records.push_back(rr);
        table.add_row({label, to_string(pol), format_float(rec.integrated_alpha_ghz_per_cm),
                       format_float(rr.f_abs), format_float(rr.rate_hz)});
        std::cout << label << " " << to_string(pol) << "  f = " << format_float(rr.f_abs)
                  << "  rate = " << format_float(rr.rate_hz) << " Hz\n";
    }
    if (!out_path.empty()) table.write(out_path);

    const AggregateResult agg = aggregate_radiative_rate(records);
    std::cout << "tau_rad = " << format_float(agg.tau_rad_s) << " s (per-excited-level mean)\n";
    if (tau_f_s) {
        const double beta = branching_ratio(*tau_f_s, agg.tau_rad_s);
        std::cout << "beta = " << format_float(beta) << "\n";
        if (beta > 1.0) {
            std::cerr << "warning: beta > 1 -- the fluorescence lifetime and radiative "
                         "rate inputs are inconsistent\n";
        }
    }
    return 0;
}

int cmd_zefoz(const RunConfig& cfg, const std::string& transition, double box_t, int seeds,
              double threshold, unsigned long long seed, const std::string& out_path) {
    const TransitionSpec spec = parse_transition(transition);
    if (!(box_t > 0.0)) throw std::runtime_error("--box must be a positive half-width in Tesla");
    ZefozOptions options;
    options.gradient_threshold_ghz_per_t = threshold;
    options.seed = seed;
    const Eigen::Vector3d hi(box_t, box_t, box_t);
    const auto reports = zefoz_search(spec, cfg.system(), -hi, hi, seeds, options);

    CsvTable table;
    table.columns = {"bx_t", "by_t", "bz_t", "freq_ghz", "grad_x", "grad_y", "grad_z",
                     "gradient_norm", "hxx", "hxy", "hxz", "hyy", "hyz", "hzz"};
    for (const auto& r : reports) {
        const auto& h = r.hessian_ghz_per_t2;
        table.add_row({format_float(r.field.bx), format_float(r.field.by), format_float(r.field.bz),
                       format_float(r.freq_ghz), format_float(r.gradient_ghz_per_t(0)),
                       format_float(r.gradient_ghz_per_t(1)), format_float(r.gradient_ghz_per_t(2)),
                       format_float(r.gradient_norm), format_float(h(0, 0)), format_float(h(0, 1)),
                       format_float(h(0, 2)), format_float(h(1, 1)), format_float(h(1, 2)),
                       format_float(h(2, 2))});
        std::cout << "zefoz point at (" << format_float(r.field.bx) << ", "
                  << format_float(r.field.by) << ", " << format_float(r.field.bz) << ") T, "
                  << "f = " << format_float(r.freq_ghz) << " GHz, |grad| = "
                  << format_float(r.gradient_norm) << " GHz/T\n";
    }
    if (reports.empty()) std::cout << "no zefoz points below threshold in the search box\n";
    if (!out_path.empty()) table.write(out_path);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"171Yb:YVO4 hyperfine-levels, spectra, photophysics, and fitting toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_path, field_text = "0,0,0", manifold = "ground";
    std::string range_text, grid_text, pol_text = "pi", orientation = "1,0,0";
    std::string obs_path, trace_path, model = "exp", mode = "field", transition = "g3-g4";
    std::string absorption_path;
    double scale = 1.0, box_t = 0.05, threshold = 1e-4;
    int seeds = 8;
    unsigned long long seed = 0;
    std::optional<double> fix_x, tau_f;

    auto* levels = app.add_subcommand("levels", "Hyperfine energies and states at a field");
    levels->add_option("--config", config_path, "Config file")->required();
    levels->add_option("--field", field_text, "Field bx,by,bz in Tesla");
    levels->add_option("--manifold", manifold, "ground or excited")
        ->check(CLI::IsMember({"ground", "excited"}));
    levels->add_option("--out", out_path, "CSV output path");

    auto* spectrum = app.add_subcommand("spectrum", "Synthesize an absorption spectrum");
    spectrum->add_option("--config", config_path, "Config file")->required();
    spectrum->add_option("--field", field_text, "Field bx,by,bz in Tesla");
    spectrum->add_option("--pol", pol_text, "pi or sigma")->check(CLI::IsMember({"pi", "sigma"}));
    spectrum->add_option("--range", range_text, "Detuning grid start:stop:steps (GHz)")->required();
    spectrum->add_option("--scale", scale, "Overall absorption scale");
    spectrum->add_option("--out", out_path, "CSV output path");

    auto* ramp = app.add_subcommand("ramp", "Field-ramp absorption map");
    ramp->add_option("--config", config_path, "Config file")->required();
    ramp->add_option("--orientation", orientation, "Field direction x,y,z");
    ramp->add_option("--range", range_text, "Field magnitudes start:stop:steps (T)")->required();
    ramp->add_option("--grid", grid_text, "Detuning grid start:stop:steps (GHz)")->required();
    ramp->add_option("--pol", pol_text, "pi or sigma")->check(CLI::IsMember({"pi", "sigma"}));
    ramp->add_option("--out", out_path, "CSV output path");

    auto* fit_ham = app.add_subcommand("fit-ham", "Fit excited-manifold tensors to peaks");
    fit_ham->add_option("--config", config_path, "Config file")->required();
    fit_ham->add_option("--obs", obs_path, "Peak observations CSV")->required();
    fit_ham->add_option("--seed", seed, "Reproducibility seed");
    fit_ham->add_option("--out", out_path, "CSV output path");

    auto* fit_decay = app.add_subcommand("fit-decay", "Fit a decay or line profile");
    fit_decay->add_option("trace", trace_path, "Trace CSV")->required();
    fit_decay->add_option("--model", model, "exp, mims, or lorentzian")
        ->check(CLI::IsMember({"exp", "mims", "lorentzian"}));
    fit_decay->add_option("--mode", mode, "field or intensity detection (mims)")
        ->check(CLI::IsMember({"field", "intensity"}));
    fit_decay->add_option("--fix-x", fix_x, "Pin the Mims stretch exponent");
    fit_decay->add_option("--out", out_path, "CSV output path");

    auto* table1 = app.add_subcommand("table1", "Oscillator strengths and rates from absorption");
    table1->add_option("--config", config_path, "Config file")->required();
    table1->add_option("absorption", absorption_path, "Integrated absorption CSV")->required();
    table1->add_option("--tau-f", tau_f, "Fluorescence lifetime (s) for the branching ratio");
    table1->add_option("--out", out_path, "CSV output path");

    auto* zefoz = app.add_subcommand("zefoz", "Search for zero-first-order-Zeeman points");
    zefoz->add_option("--config", config_path, "Config file")->required();
    zefoz->add_option("--transition", transition, "Transition, e.g. g3-g4 or e1-e2");
    zefoz->add_option("--box", box_t, "Search box half-width (T)");
    zefoz->add_option("--seeds", seeds, "Number of search starts");
    zefoz->add_option("--threshold", threshold, "Gradient norm threshold (GHz/T)");
    zefoz->add_option("--seed", seed, "Reproducibility seed");
    zefoz->add_option("--out", out_path, "CSV output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (levels->parsed()) {
            return cmd_levels(load_config(config_path), parse_field(field_text), manifold, out_path);
        }
        if (spectrum->parsed()) {
            return cmd_spectrum(load_config(config_path), parse_field(field_text),
                                parse_pol(pol_text), range_text, scale, out_path);
        }
        if (ramp->parsed()) {
            return cmd_ramp(load_config(config_path), orientation, range_text, grid_text,
                            parse_pol(pol_text), out_path);
        }
        if (fit_ham->parsed()) {
            return cmd_fit_ham(load_config(config_path), obs_path, out_path);
        }
        if (fit_decay->parsed()) {
            return cmd_fit_decay(trace_path, model, mode, fix_x, out_path);
        }
        if (table1->parsed()) {
            return cmd_table1(load_config(config_path), absorption_path, tau_f, out_path);
        }
        if (zefoz->parsed()) {
            return cmd_zefoz(load_config(config_path), transition, box_t, seeds, threshold, seed,
                             out_path);
        }
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
