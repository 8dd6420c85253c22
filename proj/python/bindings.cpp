#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ybspin/config.hpp"
#include "ybspin/fit.hpp"
#include "ybspin/photophysics.hpp"
#include "ybspin/spectra.hpp"
#include "ybspin/spin_system.hpp"
#include "ybspin/zefoz.hpp"

namespace py = pybind11;
using namespace ybspin;

namespace {

DecayTrace trace_from(std::vector<double> times, std::vector<double> values,
                      std::vector<double> sigma) {
    DecayTrace trace;
    trace.times_s = std::move(times);
    trace.values = std::move(values);
    trace.sigma = std::move(sigma);
    trace.validate();
    return trace;
}

py::dict fit_params(const FitResult& r) {
    py::dict out;
    for (std::size_t i = 0; i < r.names.size(); ++i) {
        out[py::str(r.names[i])] = r.values(static_cast<Eigen::Index>(i));
    }
    return out;
}

py::dict fit_uncertainties(const FitResult& r) {
    py::dict out;
    for (const auto& name : r.names) out[py::str(name)] = r.uncertainty(name);
    return out;
}

} // namespace

PYBIND11_MODULE(_ybspin, m) {
    m.doc() = "Effective spin Hamiltonian, spectra, photophysics, and fitting for "
              "a Kramers doublet coupled to an I=1/2 nucleus (171Yb:YVO4)";

    py::enum_<Manifold>(m, "Manifold")
        .value("ground", Manifold::ground)
        .value("excited", Manifold::excited);
    py::enum_<NuclearZeeman>(m, "NuclearZeeman")
        .value("folded", NuclearZeeman::folded)
        .value("explicit_term", NuclearZeeman::explicit_term);
    py::enum_<Polarization>(m, "Polarization")
        .value("pi", Polarization::pi)
        .value("sigma", Polarization::sigma);
    py::enum_<LineshapeKind>(m, "LineshapeKind")
        .value("gaussian", LineshapeKind::gaussian)
        .value("lorentzian", LineshapeKind::lorentzian);
    py::enum_<EchoMode>(m, "EchoMode")
        .value("field", EchoMode::field)
        .value("intensity", EchoMode::intensity);
    py::enum_<RateAggregation>(m, "RateAggregation")
        .value("per_excited_level_mean", RateAggregation::per_excited_level_mean)
        .value("arithmetic_mean", RateAggregation::arithmetic_mean);

    py::class_<PhysicalConstants>(m, "PhysicalConstants")
        .def(py::init<>())
        .def_readwrite("bohr_magneton_ghz_per_t", &PhysicalConstants::bohr_magneton_ghz_per_t)
        .def_readwrite("nuclear_magneton_ghz_per_t", &PhysicalConstants::nuclear_magneton_ghz_per_t)
        .def_readwrite("boltzmann_ghz_per_k", &PhysicalConstants::boltzmann_ghz_per_k)
        .def("validate", &PhysicalConstants::validate);

    py::class_<AxialTensor>(m, "AxialTensor")
        .def(py::init<double, double>(), py::arg("parallel"), py::arg("perpendicular"))
        .def_readwrite("parallel", &AxialTensor::parallel)
        .def_readwrite("perpendicular", &AxialTensor::perpendicular);

    py::class_<ManifoldParams>(m, "ManifoldParams")
        .def(py::init([](const AxialTensor& g, const AxialTensor& a, double gn, double offset,
                         Manifold label) {
                 ManifoldParams p{g, a, gn, offset, label};
                 p.validate();
                 return p;
             }),
             py::arg("g"), py::arg("a"), py::arg("gn") = 0.0, py::arg("optical_offset_ghz") = 0.0,
             py::arg("label") = Manifold::ground)
        .def_readwrite("g", &ManifoldParams::g)
        .def_readwrite("a", &ManifoldParams::a)
        .def_readwrite("gn", &ManifoldParams::gn)
        .def_readwrite("optical_offset_ghz", &ManifoldParams::optical_offset_ghz)
        .def_readwrite("label", &ManifoldParams::label);

    py::class_<FieldVector>(m, "FieldVector")
        .def(py::init<double, double, double>(), py::arg("bx") = 0.0, py::arg("by") = 0.0,
             py::arg("bz") = 0.0)
        .def_readwrite("bx", &FieldVector::bx)
        .def_readwrite("by", &FieldVector::by)
        .def_readwrite("bz", &FieldVector::bz)
        .def("magnitude", &FieldVector::magnitude)
        .def_static("along_c", &FieldVector::along_c, py::arg("b"));

    py::class_<LevelSet>(m, "LevelSet")
        .def_readonly("energies", &LevelSet::energies)
        .def_readonly("labels", &LevelSet::labels)
        .def_property_readonly("states",
                               [](const LevelSet& ls) {
                                   std::vector<Vector4c> states(ls.states.begin(), ls.states.end());
                                   return states;
                               })
        .def_readonly("field", &LevelSet::field)
        .def_readonly("manifold", &LevelSet::manifold);

    py::class_<SpinSystem>(m, "SpinSystem")
        .def(py::init<ManifoldParams, ManifoldParams, PhysicalConstants, NuclearZeeman>(),
             py::arg("ground"), py::arg("excited"), py::arg("consts") = PhysicalConstants{},
             py::arg("mode") = NuclearZeeman::folded)
        .def_readwrite("ground", &SpinSystem::ground)
        .def_readwrite("excited", &SpinSystem::excited)
        .def_readwrite("consts", &SpinSystem::consts)
        .def_readwrite("mode", &SpinSystem::mode)
        .def("solve", &SpinSystem::solve, py::arg("manifold"), py::arg("field"));

    m.def("spin_operators", [] {
        const SpinOperators ops = spin_operators();
        py::dict out;
        out["sx"] = ops.sx;
        out["sy"] = ops.sy;
        out["sz"] = ops.sz;
        out["ix"] = ops.ix;
        out["iy"] = ops.iy;
        out["iz"] = ops.iz;
        return out;
    });
    m.def("build_hamiltonian", &build_hamiltonian, py::arg("params"), py::arg("field"),
          py::arg("consts") = PhysicalConstants{}, py::arg("mode") = NuclearZeeman::folded);
    m.def("eigensolve", &eigensolve, py::arg("h"), py::arg("field") = FieldVector{},
          py::arg("manifold") = Manifold::ground);
    m.def("solve_levels", &solve_levels, py::arg("params"), py::arg("field"),
          py::arg("consts") = PhysicalConstants{}, py::arg("mode") = NuclearZeeman::folded);
    m.def("zero_field_levels", &zero_field_levels, py::arg("a"));
    m.def("zero_field_states", [](Manifold manifold, const AxialTensor& a) {
        py::list out;
        for (const auto& s : zero_field_states(manifold, a)) {
            out.append(py::make_tuple(s.label, s.state));
        }
        return out;
    });
    m.def("high_field_labels", &high_field_labels, py::arg("levels"), py::arg("params"),
          py::arg("consts") = PhysicalConstants{});
    m.def("scale_hyperfine_isotope", &scale_hyperfine_isotope, py::arg("a"),
          py::arg("moment_ratio"));

    py::class_<TransitionMoment>(m, "TransitionMoment")
        .def_readwrite("pol", &TransitionMoment::pol)
        .def_readwrite("m", &TransitionMoment::m);
    m.def("default_moments", &default_moments, py::arg("pi_amplitude"),
          py::arg("sigma_amplitude"));

    py::class_<TransitionLine>(m, "TransitionLine")
        .def_readonly("freq_ghz", &TransitionLine::freq_ghz)
        .def_readonly("pol", &TransitionLine::pol)
        .def_readonly("amplitude", &TransitionLine::amplitude)
        .def_readonly("gi", &TransitionLine::gi)
        .def_readonly("gj", &TransitionLine::gj)
        .def_readonly("ground_index", &TransitionLine::ground_index)
        .def_readonly("excited_index", &TransitionLine::excited_index)
        .def_readonly("pairs", &TransitionLine::pairs)
        .def_readonly("forbidden", &TransitionLine::forbidden)
        .def_readonly("label", &TransitionLine::label);

    py::class_<CatalogOptions>(m, "CatalogOptions")
        .def(py::init<>())
        .def_readwrite("merge", &CatalogOptions::merge)
        .def_readwrite("merge_tol_ghz", &CatalogOptions::merge_tol_ghz)
        .def_readwrite("forbidden_rel", &CatalogOptions::forbidden_rel);

    m.def(
        "transition_catalog",
        [](const LevelSet& g, const LevelSet& e, const std::vector<TransitionMoment>& moments,
           double offset_diff, const CatalogOptions& opts) {
            return transition_catalog(g, e, moments, offset_diff, opts);
        },
        py::arg("ground"), py::arg("excited"), py::arg("moments"),
        py::arg("optical_offset_diff_ghz") = 0.0, py::arg("options") = CatalogOptions{});
    m.def(
        "catalog_at",
        [](const SpinSystem& sys, const FieldVector& b,
           const std::vector<TransitionMoment>& moments, const CatalogOptions& opts) {
            return catalog_at(sys, b, moments, opts);
        },
        py::arg("system"), py::arg("field"), py::arg("moments"),
        py::arg("options") = CatalogOptions{});
    m.def("boltzmann_populations", &boltzmann_populations, py::arg("levels"),
          py::arg("temperature_k"), py::arg("consts") = PhysicalConstants{});

    py::class_<LineshapeParams>(m, "LineshapeParams")
        .def(py::init<>())
        .def(py::init([](LineshapeKind kind, double fwhm) {
                 LineshapeParams p;
                 p.kind = kind;
                 p.fwhm_ghz = fwhm;
                 p.validate();
                 return p;
             }),
             py::arg("kind"), py::arg("fwhm_ghz"))
        .def_readwrite("kind", &LineshapeParams::kind)
        .def_readwrite("fwhm_ghz", &LineshapeParams::fwhm_ghz)
        .def_readwrite("per_line_fwhm_ghz", &LineshapeParams::per_line_fwhm_ghz);

    py::class_<Spectrum>(m, "Spectrum")
        .def_readonly("detunings_ghz", &Spectrum::detunings_ghz)
        .def_readonly("alpha_per_cm", &Spectrum::alpha_per_cm)
        .def_readonly("pol", &Spectrum::pol);

    m.def(
        "synth_spectrum",
        [](const std::vector<TransitionLine>& catalog, const std::array<double, 4>& populations,
           const LineshapeParams& shape, double scale, std::vector<double> grid, Polarization pol,
           bool require_coverage) {
            return synth_spectrum(catalog, populations, shape, scale, std::move(grid), pol,
                                  require_coverage);
        },
        py::arg("catalog"), py::arg("populations"), py::arg("shape"), py::arg("scale"),
        py::arg("grid"), py::arg("pol"), py::arg("require_coverage") = true);
    m.def("uniform_grid", &uniform_grid, py::arg("start"), py::arg("stop"), py::arg("n"));

    py::class_<RampMap>(m, "RampMap")
        .def_readonly("fields_t", &RampMap::fields_t)
        .def_readonly("detunings_ghz", &RampMap::detunings_ghz)
        .def_readonly("alpha_per_cm", &RampMap::alpha_per_cm)
        .def_readonly("pol", &RampMap::pol);

    m.def(
        "field_ramp_map",
        [](const SpinSystem& sys, const Eigen::Vector3d& orientation, std::vector<double> fields,
           const std::vector<TransitionMoment>& moments, const LineshapeParams& shape,
           double temperature_k, std::vector<double> grid, Polarization pol, double scale) {
            return field_ramp_map(sys, orientation, fields, moments, shape, temperature_k,
                                  std::move(grid), pol, scale);
        },
        py::arg("system"), py::arg("orientation"), py::arg("fields_t"), py::arg("moments"),
        py::arg("shape"), py::arg("temperature_k"), py::arg("grid"), py::arg("pol"),
        py::arg("scale") = 1.0);

    py::class_<Peak>(m, "Peak")
        .def_readonly("center_ghz", &Peak::center_ghz)
        .def_readonly("height", &Peak::height)
        .def_readonly("fwhm_estimate_ghz", &Peak::fwhm_estimate_ghz)
        .def_readonly("prominence", &Peak::prominence);
    m.def("peak_find", &peak_find, py::arg("spectrum"), py::arg("min_prominence"));

    py::class_<OpticalMedium>(m, "OpticalMedium")
        .def(py::init<double, double, double>(), py::arg("n_parallel"), py::arg("n_perpendicular"),
             py::arg("wavelength0_m"))
        .def_readwrite("n_parallel", &OpticalMedium::n_parallel)
        .def_readwrite("n_perpendicular", &OpticalMedium::n_perpendicular)
        .def_readwrite("wavelength0_m", &OpticalMedium::wavelength0_m);

    py::class_<AbsorptionRecord>(m, "AbsorptionRecord")
        .def(py::init<>())
        .def_readwrite("label", &AbsorptionRecord::label)
        .def_readwrite("pol", &AbsorptionRecord::pol)
        .def_readwrite("integrated_alpha_ghz_per_cm", &AbsorptionRecord::integrated_alpha_ghz_per_cm)
        .def_readwrite("originating_level", &AbsorptionRecord::originating_level)
        .def_readwrite("originating_degeneracy", &AbsorptionRecord::originating_degeneracy)
        .def_readwrite("excited_degeneracy", &AbsorptionRecord::excited_degeneracy)
        .def_readwrite("excited_levels", &AbsorptionRecord::excited_levels);

    py::class_<RateRecord>(m, "RateRecord")
        .def_readonly("rec", &RateRecord::rec)
        .def_readonly("f_abs", &RateRecord::f_abs)
        .def_readonly("f_em", &RateRecord::f_em)
        .def_readonly("rate_hz", &RateRecord::rate_hz);

    py::class_<AggregateResult>(m, "AggregateResult")
        .def_readonly("mean_rate_hz", &AggregateResult::mean_rate_hz)
        .def_readonly("tau_rad_s", &AggregateResult::tau_rad_s)
        .def_readonly("per_excited_level_rate_hz", &AggregateResult::per_excited_level_rate_hz);

    m.def("oscillator_strength", &oscillator_strength, py::arg("record"),
          py::arg("number_density_per_cm3"), py::arg("level_population"), py::arg("medium"));
    m.def("emission_oscillator_strength", &emission_oscillator_strength, py::arg("f_abs"),
          py::arg("gi"), py::arg("gj"));
    m.def("radiative_rate", &radiative_rate, py::arg("f_em"), py::arg("medium"), py::arg("pol"));
    m.def("absorption_to_rate", &absorption_to_rate, py::arg("record"),
          py::arg("number_density_per_cm3"), py::arg("populations"), py::arg("medium"));
    m.def(
        "aggregate_radiative_rate",
        [](const std::vector<RateRecord>& records, RateAggregation how) {
            return aggregate_radiative_rate(records, how);
        },
        py::arg("records"), py::arg("how") = RateAggregation::per_excited_level_mean);
    m.def("branching_ratio", &branching_ratio, py::arg("tau_f_s"), py::arg("tau_rad_s"));

    py::class_<FitResult>(m, "FitResult")
        .def_property_readonly("params", &fit_params)
        .def_property_readonly("uncertainties", &fit_uncertainties)
        .def_readonly("covariance", &FitResult::covariance)
        .def_readonly("residual_norm", &FitResult::residual_norm)
        .def_readonly("initial_residual_norm", &FitResult::initial_residual_norm)
        .def_readonly("iterations", &FitResult::iterations)
        .def_readonly("converged", &FitResult::converged)
        .def_readonly("flags", &FitResult::flags)
        .def_readonly("message", &FitResult::message)
        .def("param", &FitResult::param)
        .def("uncertainty", &FitResult::uncertainty);

    m.def(
        "fit_exponential",
        [](std::vector<double> times, std::vector<double> values, std::vector<double> sigma) {
            return fit_exponential(trace_from(std::move(times), std::move(values), std::move(sigma)));
        },
        py::arg("times_s"), py::arg("values"), py::arg("sigma") = std::vector<double>{});
    m.def(
        "fit_mims",
        [](std::vector<double> times, std::vector<double> values, EchoMode mode,
           std::optional<double> fix_x, std::vector<double> sigma) {
            return fit_mims(trace_from(std::move(times), std::move(values), std::move(sigma)),
                            mode, fix_x);
        },
        py::arg("times_s"), py::arg("values"), py::arg("mode") = EchoMode::field,
        py::arg("fix_x") = std::nullopt, py::arg("sigma") = std::vector<double>{});
    m.def("effective_linewidth", &effective_linewidth, py::arg("tm_s"));
    m.def(
        "fit_lorentzian",
        [](const std::vector<double>& xs, const std::vector<double>& ys) {
            return fit_lorentzian(xs, ys);
        },
        py::arg("xs"), py::arg("ys"));

    py::class_<PeakObservation>(m, "PeakObservation")
        .def(py::init<>())
        .def_readwrite("field", &PeakObservation::field)
        .def_readwrite("pol", &PeakObservation::pol)
        .def_readwrite("freq_ghz", &PeakObservation::freq_ghz)
        .def_readwrite("uncertainty_ghz", &PeakObservation::uncertainty_ghz)
        .def_readwrite("label", &PeakObservation::label)
        .def_readwrite("ground_index", &PeakObservation::ground_index)
        .def_readwrite("excited_index", &PeakObservation::excited_index);

    py::class_<Assignment>(m, "Assignment")
        .def_readonly("line_for_obs", &Assignment::line_for_obs)
        .def_readonly("unmatched", &Assignment::unmatched)
        .def_readonly("ambiguous", &Assignment::ambiguous);
    m.def(
        "line_assignment",
        [](const std::vector<PeakObservation>& obs, const std::vector<TransitionLine>& lines,
           double gate) { return line_assignment(obs, lines, gate); },
        py::arg("observations"), py::arg("predicted"), py::arg("gate_sigmas") = 3.0);
    m.def(
        "fit_spin_hamiltonian",
        [](const std::vector<PeakObservation>& obs, const ManifoldParams& ground,
           const ManifoldParams& guess, const PhysicalConstants& consts,
           const std::vector<TransitionMoment>& moments, NuclearZeeman mode) {
            return fit_spin_hamiltonian(obs, ground, guess, consts, moments, mode);
        },
        py::arg("observations"), py::arg("ground"), py::arg("excited_guess"),
        py::arg("consts") = PhysicalConstants{},
        py::arg("moments") = default_moments(1.0, 0.435467),
        py::arg("mode") = NuclearZeeman::folded);

    py::class_<TransitionSpec>(m, "TransitionSpec")
        .def(py::init([](Manifold ma, int la, Manifold mb, int lb) {
                 TransitionSpec spec{ma, la, mb, lb};
                 spec.validate();
                 return spec;
             }),
             py::arg("manifold_a"), py::arg("level_a"), py::arg("manifold_b"), py::arg("level_b"))
        .def_readwrite("manifold_a", &TransitionSpec::manifold_a)
        .def_readwrite("level_a", &TransitionSpec::level_a)
        .def_readwrite("manifold_b", &TransitionSpec::manifold_b)
        .def_readwrite("level_b", &TransitionSpec::level_b);

    py::class_<GradientResult>(m, "GradientResult")
        .def_readonly("gradient_ghz_per_t", &GradientResult::gradient_ghz_per_t)
        .def_readonly("degenerate", &GradientResult::degenerate)
        .def_readonly("min_gap_ghz", &GradientResult::min_gap_ghz);

    py::class_<ZefozReport>(m, "ZefozReport")
        .def_readonly("field", &ZefozReport::field)
        .def_readonly("freq_ghz", &ZefozReport::freq_ghz)
        .def_readonly("gradient_ghz_per_t", &ZefozReport::gradient_ghz_per_t)
        .def_readonly("hessian_ghz_per_t2", &ZefozReport::hessian_ghz_per_t2)
        .def_readonly("gradient_norm", &ZefozReport::gradient_norm);

    m.def("transition_frequency", &transition_frequency, py::arg("spec"), py::arg("system"),
          py::arg("field"));
    m.def("frequency_gradient", &frequency_gradient, py::arg("spec"), py::arg("system"),
          py::arg("field"), py::arg("step_t") = 1e-3);
    m.def(
        "zefoz_search",
        [](const TransitionSpec& spec, const SpinSystem& sys, const Eigen::Vector3d& lo,
           const Eigen::Vector3d& hi, int seeds, double step_t, double threshold,
           unsigned long long seed) {
            ZefozOptions options;
            options.step_t = step_t;
            options.gradient_threshold_ghz_per_t = threshold;
            options.seed = seed;
            return zefoz_search(spec, sys, lo, hi, seeds, options);
        },
        py::arg("spec"), py::arg("system"), py::arg("box_lo"), py::arg("box_hi"),
        py::arg("seeds") = 8, py::arg("step_t") = 1e-3, py::arg("threshold") = 1e-4,
        py::arg("seed") = 0);

    py::class_<AdjacencyEntry>(m, "AdjacencyEntry")
        .def_readonly("letter", &AdjacencyEntry::letter)
        .def_readonly("forbidden", &AdjacencyEntry::forbidden)
        .def_readonly("pol", &AdjacencyEntry::pol)
        .def_readonly("pairs", &AdjacencyEntry::pairs);

    py::class_<RunConfig>(m, "RunConfig")
        .def_readonly("constants", &RunConfig::constants)
        .def_readonly("ground", &RunConfig::ground)
        .def_readonly("excited", &RunConfig::excited)
        .def_readonly("medium", &RunConfig::medium)
        .def_readonly("number_density_per_cm3", &RunConfig::number_density_per_cm3)
        .def_readonly("temperature_k", &RunConfig::temperature_k)
        .def_readonly("pi_moment_amplitude", &RunConfig::pi_moment_amplitude)
        .def_readonly("sigma_moment_amplitude", &RunConfig::sigma_moment_amplitude)
        .def_readonly("lineshape", &RunConfig::lineshape)
        .def_readonly("adjacency", &RunConfig::adjacency)
        .def_readonly("isotope_moment_ratio", &RunConfig::isotope_moment_ratio)
        .def_readonly("nuclear_zeeman", &RunConfig::nuclear_zeeman)
        .def("system", &RunConfig::system)
        .def("moments", &RunConfig::moments);
    m.def("load_config", &load_config, py::arg("path"));
    m.def("parse_config", &parse_config, py::arg("text"), py::arg("origin") = "<string>");
}
